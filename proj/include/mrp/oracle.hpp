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

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mrp/error.hpp"
#include "mrp/graph.hpp"
#include "mrp/params.hpp"

namespace mrp {

/// Exact small-graph solver. Minimizing the global quadratic loss
///   sum over directed edges s -> d of  omega/2 * (x_d - eta x_s - tau)^2
/// with labeled values clamped yields a symmetric linear system over the
/// unlabeled nodes; its solution is the stationary point the iterative
/// engine approaches, so this solver serves as a brute-force oracle.
struct LinearSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
  /// row -> node index of the unlabeled node it represents.
  std::vector<NodeId> unlabeled;
  /// node index -> row, or -1 for labeled nodes.
  std::vector<std::int32_t> row_of;
};

/// Global quadratic loss of a fully valued assignment.
inline double quadratic_objective(const MultiRelationalGraph& graph,
                                  const std::vector<RelationParams>& params,
                                  const std::vector<double>& values) {
  if (params.size() != graph.relation_count())
    throw Error("need one parameter triple per relation");
  if (values.size() != graph.node_count())
    throw Error("values must cover every node");
  double loss = 0.0;
  graph.for_each_directed_edge([&](NodeId src, NodeId dst, RelationId rel) {
    const RelationParams& p = params[rel];
    const double r = values[dst] - p.eta * values[src] - p.tau;
    loss += 0.5 * p.omega * r * r;
  });
  return loss;
}

/// Assembles the stationarity system of the global loss over the unlabeled
/// nodes. Each directed edge s -> d contributes omega to diagonal(d),
/// omega*eta^2 to diagonal(s) and -omega*eta off-diagonal; terms touching a
/// labeled endpoint move to the right-hand side together with the tau shifts.
inline LinearSystem assemble(const MultiRelationalGraph& graph,
                             const std::vector<RelationParams>& params,
                             const NodeValueMap& labels) {
  if (params.size() != graph.relation_count())
    throw Error("need one parameter triple per relation");
  if (labels.node_count() != graph.node_count())
    throw Error("label map does not match graph size");

  LinearSystem sys;
  sys.row_of.assign(graph.node_count(), -1);
  for (NodeId i = 0; i < static_cast<NodeId>(graph.node_count()); ++i) {
    if (!labels.has(i)) {
      sys.row_of[i] = static_cast<std::int32_t>(sys.unlabeled.size());
      sys.unlabeled.push_back(i);
    }
  }
  const std::size_t m = sys.unlabeled.size();
  if (m == 0) throw Error("assemble: no unlabeled nodes");
  sys.matrix = Eigen::MatrixXd::Zero(m, m);
  sys.rhs = Eigen::VectorXd::Zero(m);

  graph.for_each_directed_edge([&](NodeId src, NodeId dst, RelationId rel) {
    const RelationParams& p = params[rel];
    const std::int32_t rd = sys.row_of[dst];
    const std::int32_t rs = sys.row_of[src];
    // d/dx_d: omega * (x_d - eta x_s - tau) = 0
    if (rd >= 0) {
      sys.matrix(rd, rd) += p.omega;
      if (rs >= 0)
        sys.matrix(rd, rs) -= p.omega * p.eta;
      else
        sys.rhs(rd) += p.omega * p.eta * labels.at(src);
      sys.rhs(rd) += p.omega * p.tau;
    }
    // d/dx_s: -omega*eta * (x_d - eta x_s - tau) = 0
    if (rs >= 0) {
      sys.matrix(rs, rs) += p.omega * p.eta * p.eta;
      if (rd >= 0)
        sys.matrix(rs, rd) -= p.omega * p.eta;
      else
        sys.rhs(rs) += p.omega * p.eta * labels.at(dst);
      sys.rhs(rs) -= p.omega * p.eta * p.tau;
    }
  });
  return sys;
}

struct ExactSolveOptions {
  /// Refuse systems with more unlabeled nodes than this.
  std::size_t max_unlabeled = 2000;
};

namespace oracle_detail {

/// Verifies that every connected component (under the union of edges) holds
/// at least one labeled node; otherwise the system is singular.
inline void check_components_labeled(const MultiRelationalGraph& graph,
                                     const NodeValueMap& labels) {
  const std::size_t n = graph.node_count();
  std::vector<std::vector<NodeId>> adj(n);
  graph.for_each_directed_edge([&](NodeId src, NodeId dst, RelationId) {
    adj[src].push_back(dst);
    adj[dst].push_back(src);
  });
  std::vector<char> seen(n, 0);
  for (NodeId start = 0; start < static_cast<NodeId>(n); ++start) {
    if (seen[start]) continue;
    std::vector<NodeId> queue{start};
    seen[start] = 1;
    bool labeled = false;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId v = queue[head];
      if (labels.has(v)) labeled = true;
      for (NodeId w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
    }
    if (!labeled)
      throw Error("singular system: component containing node '" +
                  graph.node_label(start) + "' has no labeled node");
  }
}

}  // namespace oracle_detail

/// Solves the stationarity system exactly (dense LDLT with one refinement
/// pass) and returns all node values, labels included.
///
/// Preconditions: every connected component holds a labeled node, every
/// relation has eta > 0, and the unlabeled count is within the cap.
inline NodeValueMap solve_exact(const MultiRelationalGraph& graph,
                                const std::vector<RelationParams>& params,
                                const NodeValueMap& labels,
                                const ExactSolveOptions& options = {}) {
  if (params.size() != graph.relation_count())
    throw Error("need one parameter triple per relation");
  if (labels.empty()) throw Error("solve_exact: no labeled nodes");
  for (RelationId r = 0; r < static_cast<RelationId>(params.size()); ++r) {
    if (!(params[r].eta > 0.0) || !std::isfinite(params[r].eta))
      throw Error("solve_exact requires eta > 0 for relation '" +
                  graph.relation(r).name + "'");
    if (!(params[r].omega > 0.0) || !std::isfinite(params[r].omega) ||
        !std::isfinite(params[r].tau))
      throw Error("invalid parameters for relation '" +
                  graph.relation(r).name + "'");
  }
  oracle_detail::check_components_labeled(graph, labels);

  NodeValueMap out(graph.node_count());
  if (labels.size() == graph.node_count()) {
    for (NodeId i : labels.labeled()) out.set(i, labels.at(i));
    return out;  // fully labeled: nothing to solve
  }

  LinearSystem sys = assemble(graph, params, labels);
  if (sys.unlabeled.size() > options.max_unlabeled)
    throw Error("solve_exact: unlabeled node count " +
                std::to_string(sys.unlabeled.size()) + " exceeds cap " +
                std::to_string(options.max_unlabeled));

  Eigen::LDLT<Eigen::MatrixXd> ldlt(sys.matrix);
  if (ldlt.info() != Eigen::Success)
    throw Error("singular system: factorization failed");
  Eigen::VectorXd x = ldlt.solve(sys.rhs);
  x += ldlt.solve(sys.rhs - sys.matrix * x);  // one refinement pass

  const double scale = std::max(1.0, sys.rhs.lpNorm<Eigen::Infinity>());
  const double residual =
      (sys.matrix * x - sys.rhs).lpNorm<Eigen::Infinity>();
  if (!(residual < 1e-10 * scale))
    throw Error("singular or ill-conditioned system: solve residual " +
                std::to_string(residual));

  for (NodeId i = 0; i < static_cast<NodeId>(graph.node_count()); ++i) {
    if (labels.has(i))
      out.set(i, labels.at(i));
    else
      out.set(i, x(sys.row_of[i]));
  }
  return out;
}

}  // namespace mrp
