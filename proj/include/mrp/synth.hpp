// Copyright 2026 The mrp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "mrp/error.hpp"
#include "mrp/graph.hpp"
#include "mrp/rng.hpp"

namespace mrp {

struct SynthRelationSpec {
  std::string name;
  double eta = 1.0;    // must be > 0
  double tau = 0.0;
  double sigma = 0.0;  // must be >= 0
  int extra_edge_count = 0;
};

/// Recipe for a synthetic graph whose values follow the relational local
/// generative model exactly on a random spanning tree, with optional extra
/// edges for structural stress (the model holds only approximately across
/// those).
struct SynthSpec {
  int node_count = 2;
  std::vector<SynthRelationSpec> relations;
  double root_value_mean = 0.0;
  double root_value_std = 1.0;
  std::uint64_t seed = 0;
};

struct SynthData {
  MultiRelationalGraph graph;
  NodeValueMap values;  // every node valued
};

namespace synth_detail {

/// Uniform spanning tree of the complete graph on n nodes via a random
/// Pruefer sequence. Returns the tree's edges as unordered pairs.
inline std::vector<std::pair<NodeId, NodeId>> random_tree(int n, Rng& rng) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  if (n == 2) {
    edges.emplace_back(0, 1);
    return edges;
  }
  std::vector<int> seq(n - 2);
  for (int& s : seq) s = static_cast<int>(rng.below(n));
  std::vector<int> degree(n, 1);
  for (int s : seq) ++degree[s];
  int ptr = 0;
  while (degree[ptr] != 1) ++ptr;
  int leaf = ptr;
  for (int s : seq) {
    edges.emplace_back(static_cast<NodeId>(leaf), static_cast<NodeId>(s));
    if (--degree[s] == 1 && s < ptr) {
      leaf = s;
    } else {
      ++ptr;
      while (degree[ptr] != 1) ++ptr;
      leaf = ptr;
    }
  }
  edges.emplace_back(static_cast<NodeId>(leaf), static_cast<NodeId>(n - 1));
  return edges;
}

}  // namespace synth_detail

/// Generates graph and values from the spec, deterministically in the seed.
///
/// Construction order (fixed; this is what makes seeds reproducible):
///   1. a uniformly random spanning tree (Pruefer sequence, node_count - 2
///      integer draws),
///   2. the root value at node 0 (one normal draw),
///   3. each remaining node in breadth-first order from the root: a relation
///      draw, an orientation draw (which endpoint plays the model's head),
///      and one normal draw for the edge noise — the child's value then
///      satisfies the chosen relation's model along the stored direction
///      exactly,
///   4. per relation, its extra non-tree edges (two node draws each,
///      rejecting self-loops and duplicates); these receive no value draws.
inline SynthData generate(const SynthSpec& spec) {
  if (spec.node_count < 2) throw Error("node_count must be >= 2");
  if (spec.relations.empty()) throw Error("at least one relation required");
  for (const auto& r : spec.relations) {
    if (!(r.eta > 0.0))
      throw Error("relation '" + r.name + "': eta must be > 0");
    if (!(r.sigma >= 0.0) || !std::isfinite(r.sigma))
      throw Error("relation '" + r.name + "': sigma must be finite and >= 0");
    if (r.extra_edge_count < 0)
      throw Error("relation '" + r.name + "': extra_edge_count must be >= 0");
    if (!std::isfinite(r.tau) || !std::isfinite(r.eta))
      throw Error("relation '" + r.name + "': parameters must be finite");
  }

  const int n = spec.node_count;
  Rng rng(spec.seed);

  SynthData data;
  for (int i = 0; i < n; ++i) data.graph.intern_node("n" + std::to_string(i));
  for (const auto& r : spec.relations) data.graph.intern_relation(r.name);

  const auto tree = synth_detail::random_tree(n, rng);
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& [a, b] : tree) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());

  std::vector<double> value(n, 0.0);
  value[0] = spec.root_value_mean + spec.root_value_std * rng.normal();

  // Breadth-first from the root; every visited child closes one tree edge.
  std::vector<char> seen(n, 0);
  std::vector<NodeId> queue{0};
  seen[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId parent = queue[head];
    for (NodeId child : adj[parent]) {
      if (seen[child]) continue;
      seen[child] = 1;
      queue.push_back(child);

      const auto rel = static_cast<RelationId>(
          rng.below(spec.relations.size()));
      const SynthRelationSpec& rs = spec.relations[rel];
      const bool child_is_head = rng.below(2) == 0;
      const double noise = rs.sigma * rng.normal();
      if (child_is_head) {
        // Stored edge parent -> child; the model reads
        // x_child = eta * x_parent + tau + noise.
        value[child] = rs.eta * value[parent] + rs.tau + noise;
        data.graph.add_edge(parent, rel, child);
      } else {
        // Stored edge child -> parent; x_parent = eta * x_child + tau + noise
        // holds exactly with the sampled noise.
        value[child] = (value[parent] - rs.tau - noise) / rs.eta;
        data.graph.add_edge(child, rel, parent);
      }
    }
  }

  for (RelationId rel = 0;
       rel < static_cast<RelationId>(spec.relations.size()); ++rel) {
    const int wanted = spec.relations[rel].extra_edge_count;
    for (int k = 0; k < wanted; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        const NodeId a = static_cast<NodeId>(rng.below(n));
        const NodeId b = static_cast<NodeId>(rng.below(n));
        if (a == b || data.graph.has_edge(a, rel, b)) continue;
        data.graph.add_edge(a, rel, b);
        placed = true;
        break;
      }
      if (!placed)
        throw Error("could not place extra edge for relation '" +
                    spec.relations[rel].name + "'");
    }
  }

  data.values = NodeValueMap(n);
  for (NodeId i = 0; i < n; ++i) data.values.set(i, value[i]);
  return data;
}

}  // namespace mrp
