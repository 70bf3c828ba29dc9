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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "mrp/io.hpp"
#include "mrp/params.hpp"
#include "mrp/synth.hpp"

using namespace mrp;

namespace {

std::string edges_text(const MultiRelationalGraph& g) {
  std::ostringstream out;
  write_edges(g, out);
  return out.str();
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  SynthSpec spec;
  spec.node_count = 500;
  spec.seed = 1234;
  spec.relations = {{"r0", 1.0, 2.0, 0.5, 20}, {"r1", 2.0, -1.0, 0.1, 0}};
  auto a = generate(spec);
  auto b = generate(spec);
  CHECK(edges_text(a.graph) == edges_text(b.graph));
  for (NodeId i = 0; i < 500; ++i) CHECK(a.values.at(i) == b.values.at(i));

  spec.seed = 1235;
  auto c = generate(spec);
  CHECK(edges_text(a.graph) != edges_text(c.graph));
}

TEST_CASE("the core is a spanning tree plus the requested extras") {
  SynthSpec spec;
  spec.node_count = 200;
  spec.seed = 7;
  spec.relations = {{"r0", 1.0, 0.0, 1.0, 15}, {"r1", 1.0, 0.0, 1.0, 5}};
  auto data = generate(spec);
  CHECK(data.graph.node_count() == 200);
  CHECK(data.graph.stored_edge_count() == 199 + 15 + 5);
  CHECK(data.graph.edges(0).size() + data.graph.edges(1).size() == 219);
  CHECK(data.values.size() == 200);

  // Connectivity via undirected reachability from node 0.
  std::vector<char> seen(200, 0);
  std::vector<NodeId> queue{0};
  seen[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (const auto& e : data.graph.incident(queue[head])) {
      if (!seen[e.neighbor]) {
        seen[e.neighbor] = 1;
        queue.push_back(e.neighbor);
      }
    }
  }
  CHECK(queue.size() == 200);
}

TEST_CASE("noise-free trees satisfy the generative model exactly") {
  SynthSpec spec;
  spec.node_count = 300;
  spec.seed = 99;
  spec.root_value_mean = 0.0;
  spec.root_value_std = 0.0;  // integer lattice keeps all arithmetic exact
  spec.relations = {{"step", 1.0, 5.0, 0.0, 0}};
  auto data = generate(spec);

  for (const Edge& e : data.graph.edges(0)) {
    const double residual =
        data.values.at(e.dst) - (1.0 * data.values.at(e.src) + 5.0);
    CHECK(residual == 0.0);
  }

  auto est = estimate(data.graph, data.values, 0, EstimationOptions{true, 1});
  CHECK(est.params.tau == 5.0);
  CHECK(est.params.omega == kOmegaMax);
}

TEST_CASE("parameter recovery from a large noisy tree") {
  SynthSpec spec;
  spec.node_count = 10001;  // 10000 tree edges
  spec.relations = {{"r", 1.0, 3.0, 1.0, 0}};
  for (std::uint64_t seed : {301u, 302u}) {
    spec.seed = seed;
    auto data = generate(spec);
    auto est =
        estimate(data.graph, data.values, 0, EstimationOptions{true, 1});
    CHECK(est.pair_count == 10000);
    CHECK(std::abs(est.params.tau - 3.0) < 0.05);
    CHECK(std::abs(1.0 / est.params.omega - 1.0) < 0.1);
  }
}

TEST_CASE("scaling relations generate along both orientations") {
  SynthSpec spec;
  spec.node_count = 64;
  spec.seed = 5;
  spec.root_value_mean = 8.0;
  spec.root_value_std = 0.0;
  spec.relations = {{"double", 2.0, 0.0, 0.0, 0}};
  auto data = generate(spec);
  for (const Edge& e : data.graph.edges(0)) {
    const double ratio = data.values.at(e.dst) / data.values.at(e.src);
    CHECK(ratio == Catch::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("invalid specs are rejected") {
  SynthSpec spec;
  spec.node_count = 1;
  spec.relations = {{"r", 1.0, 0.0, 0.0, 0}};
  CHECK_THROWS(generate(spec));
  spec.node_count = 5;
  spec.relations.clear();
  CHECK_THROWS(generate(spec));
  spec.relations = {{"r", 0.0, 0.0, 0.0, 0}};  // eta must be positive
  CHECK_THROWS(generate(spec));
  spec.relations = {{"r", 1.0, 0.0, -1.0, 0}};  // sigma must be >= 0
  CHECK_THROWS(generate(spec));
}
