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

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mrp/error.hpp"

namespace mrp {

using NodeId = std::int32_t;
using RelationId = std::int32_t;

/// One relation type. Edges of a symmetric relation are stored once per
/// undirected pair and expanded to both orientations when iterated.
struct Relation {
  std::string name;
  bool symmetric = false;
};

/// A directed edge src -> dst. Information semantics: dst relates to src
/// through the relation's forward branch.
struct Edge {
  NodeId src;
  NodeId dst;
};

/// Whether an edge points toward the node being queried (forward) or away
/// from it (reverse).
enum class Orientation { Forward, Reverse };

struct IncidenceEntry {
  NodeId neighbor;
  RelationId relation;
  Orientation orientation;
};

/// A directed multi-relational graph: a node registry, a relation registry
/// and per-relation edge lists. Node and relation indexes are dense and
/// assigned in first-appearance order; every iteration order in the library
/// derives from those, which keeps downstream computations reproducible.
///
/// Construction is incremental and single-threaded; once built, the graph is
/// immutable in practice and safe to share across threads.
class MultiRelationalGraph {
 public:
  /// Returns the node's index, registering the label on first use.
  NodeId intern_node(std::string_view label) {
    auto it = node_index_.find(std::string(label));
    if (it != node_index_.end()) return it->second;
    if (label.empty()) throw Error("empty node label");
    const NodeId id = static_cast<NodeId>(node_labels_.size());
    node_labels_.emplace_back(label);
    node_index_.emplace(node_labels_.back(), id);
    incidence_.emplace_back();
    return id;
  }

  /// Returns the relation's index, registering it on first use. A second
  /// registration with a conflicting symmetry flag is an error.
  RelationId intern_relation(std::string_view name, bool symmetric = false) {
    auto it = relation_index_.find(std::string(name));
    if (it != relation_index_.end()) {
      if (relations_[it->second].symmetric != symmetric)
        throw Error("relation '" + std::string(name) +
                    "' re-declared with a different symmetry flag");
      return it->second;
    }
    if (name.empty()) throw Error("empty relation name");
    const RelationId id = static_cast<RelationId>(relations_.size());
    relations_.push_back(Relation{std::string(name), symmetric});
    relation_index_.emplace(relations_.back().name, id);
    edges_.emplace_back();
    edge_keys_.emplace_back();
    return id;
  }

  /// Adds the directed edge src -> dst of the given relation. Rejects
  /// self-loops and duplicate (src, relation, dst) triples; for symmetric
  /// relations the pair is canonicalized, so {a,b} and {b,a} collide.
  void add_edge(NodeId src, RelationId rel, NodeId dst) {
    check_node(src);
    check_node(dst);
    check_relation(rel);
    if (src == dst)
      throw Error("self-loop at node '" + node_labels_[src] + "'");
    const bool sym = relations_[rel].symmetric;
    const std::uint64_t key = edge_key(src, dst, sym);
    if (!edge_keys_[rel].insert(key).second)
      throw Error("duplicate edge " + node_labels_[src] + " -[" +
                  relations_[rel].name + "]-> " + node_labels_[dst]);
    edges_[rel].push_back(Edge{src, dst});
    edge_log_.push_back(LoggedEdge{src, rel, dst});
    if (sym) {
      // Both directed orientations exist; each endpoint sees the other as a
      // forward neighbor first, then as a reverse one.
      incidence_[dst].push_back({src, rel, Orientation::Forward});
      incidence_[dst].push_back({src, rel, Orientation::Reverse});
      incidence_[src].push_back({dst, rel, Orientation::Forward});
      incidence_[src].push_back({dst, rel, Orientation::Reverse});
      directed_edge_count_ += 2;
    } else {
      incidence_[dst].push_back({src, rel, Orientation::Forward});
      incidence_[src].push_back({dst, rel, Orientation::Reverse});
      directed_edge_count_ += 1;
    }
  }

  std::size_t node_count() const { return node_labels_.size(); }
  std::size_t relation_count() const { return relations_.size(); }

  /// Stored edges (symmetric pairs counted once).
  std::size_t stored_edge_count() const {
    std::size_t n = 0;
    for (const auto& e : edges_) n += e.size();
    return n;
  }

  /// Directed edges after expanding symmetric relations to both orientations.
  std::size_t directed_edge_count() const { return directed_edge_count_; }

  const std::string& node_label(NodeId id) const {
    check_node(id);
    return node_labels_[id];
  }

  std::optional<NodeId> find_node(std::string_view label) const {
    auto it = node_index_.find(std::string(label));
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
  }

  const Relation& relation(RelationId id) const {
    check_relation(id);
    return relations_[id];
  }

  std::optional<RelationId> find_relation(std::string_view name) const {
    auto it = relation_index_.find(std::string(name));
    if (it == relation_index_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<Edge>& edges(RelationId rel) const {
    check_relation(rel);
    return edges_[rel];
  }

  struct LoggedEdge {
    NodeId src;
    RelationId relation;
    NodeId dst;
  };

  /// All stored edges in global insertion order, across relations.
  const std::vector<LoggedEdge>& edge_log() const { return edge_log_; }

  bool has_edge(NodeId src, RelationId rel, NodeId dst) const {
    check_node(src);
    check_node(dst);
    check_relation(rel);
    return edge_keys_[rel].count(
               edge_key(src, dst, relations_[rel].symmetric)) != 0;
  }

  /// Complete incidence list of a node, in edge-insertion order. Symmetric
  /// relations contribute both orientations per stored edge.
  const std::vector<IncidenceEntry>& incident(NodeId node) const {
    check_node(node);
    return incidence_[node];
  }

  /// Visits every directed edge after symmetric expansion, in edge-insertion
  /// order (stored orientation first): f(src, dst, relation).
  template <typename F>
  void for_each_directed_edge(F&& f) const {
    for (RelationId rel = 0; rel < static_cast<RelationId>(relations_.size());
         ++rel) {
      const bool sym = relations_[rel].symmetric;
      for (const Edge& e : edges_[rel]) {
        f(e.src, e.dst, rel);
        if (sym) f(e.dst, e.src, rel);
      }
    }
  }

  /// Subgraph with the identical node registry but only one relation's
  /// edges. Node indexes are preserved; the relation becomes index 0.
  MultiRelationalGraph relation_subgraph(RelationId rel) const {
    check_relation(rel);
    MultiRelationalGraph sub;
    sub.node_labels_ = node_labels_;
    sub.node_index_ = node_index_;
    sub.incidence_.resize(node_labels_.size());
    sub.intern_relation(relations_[rel].name, relations_[rel].symmetric);
    for (const Edge& e : edges_[rel]) sub.add_edge(e.src, 0, e.dst);
    return sub;
  }

 private:
  void check_node(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= node_labels_.size())
      throw Error("node index out of range");
  }
  void check_relation(RelationId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= relations_.size())
      throw Error("relation index out of range");
  }
  static std::uint64_t edge_key(NodeId src, NodeId dst, bool symmetric) {
    std::uint64_t a = static_cast<std::uint32_t>(src);
    std::uint64_t b = static_cast<std::uint32_t>(dst);
    if (symmetric && a > b) std::swap(a, b);
    return (a << 32) | b;
  }

  std::vector<std::string> node_labels_;
  std::unordered_map<std::string, NodeId> node_index_;
  std::vector<Relation> relations_;
  std::unordered_map<std::string, RelationId> relation_index_;
  std::vector<std::vector<Edge>> edges_;                       // per relation
  std::vector<std::unordered_set<std::uint64_t>> edge_keys_;   // per relation
  std::vector<std::vector<IncidenceEntry>> incidence_;         // per node
  std::vector<LoggedEdge> edge_log_;                           // global order
  std::size_t directed_edge_count_ = 0;
};

/// Sparse assignment of real values to graph nodes; the labeled set U.
class NodeValueMap {
 public:
  NodeValueMap() = default;
  explicit NodeValueMap(std::size_t node_count)
      : values_(node_count, 0.0), present_(node_count, 0) {}

  std::size_t node_count() const { return values_.size(); }

  /// Number of labeled nodes |U|.
  std::size_t size() const { return labeled_count_; }
  bool empty() const { return labeled_count_ == 0; }

  void set(NodeId node, double value) {
    check(node);
    if (!std::isfinite(value))
      throw Error("non-finite value for node index " + std::to_string(node));
    if (present_[node])
      throw Error("duplicate value for node index " + std::to_string(node));
    values_[node] = value;
    present_[node] = 1;
    ++labeled_count_;
  }

  bool has(NodeId node) const {
    check(node);
    return present_[node] != 0;
  }

  double at(NodeId node) const {
    if (!has(node))
      throw Error("no value for node index " + std::to_string(node));
    return values_[node];
  }

  /// Labeled node indexes in ascending order.
  std::vector<NodeId> labeled() const {
    std::vector<NodeId> out;
    out.reserve(labeled_count_);
    for (std::size_t i = 0; i < present_.size(); ++i)
      if (present_[i]) out.push_back(static_cast<NodeId>(i));
    return out;
  }

  // Dense accessors for hot loops; values_raw()[i] is 0.0 off U.
  const std::vector<double>& values_raw() const { return values_; }
  const std::vector<char>& present_raw() const { return present_; }

 private:
  void check(NodeId node) const {
    if (node < 0 || static_cast<std::size_t>(node) >= values_.size())
      throw Error("node index out of range");
  }

  std::vector<double> values_;
  std::vector<char> present_;
  std::size_t labeled_count_ = 0;
};

}  // namespace mrp
