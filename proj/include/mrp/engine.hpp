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
#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

#include "mrp/error.hpp"
#include "mrp/graph.hpp"
#include "mrp/params.hpp"

namespace mrp {

struct PropagationConfig {
  /// Damping factor in [0, 1]: weight of the fresh neighborhood estimate when
  /// updating an already-propagated node.
  double xi = 0.5;
  /// Convergence threshold as a fraction of the labeled value range.
  double epsilon_fraction = 0.001;
  int max_iterations = 1000;
  /// Worker threads for the per-node update. Results are bit-identical for
  /// any thread count: each node's sum runs in fixed incidence order and
  /// parallelism only partitions nodes.
  int threads = 1;

  void validate() const {
    if (!(xi >= 0.0 && xi <= 1.0)) throw Error("xi must be in [0, 1]");
    if (!(epsilon_fraction > 0.0))
      throw Error("epsilon_fraction must be positive");
    if (max_iterations < 1) throw Error("max_iterations must be >= 1");
    if (threads < 1) throw Error("threads must be >= 1");
  }
};

/// Jacobi-style iteration state: current values x, the 0/1 indicator u of
/// nodes that have received any information, and the iteration counter.
struct PropagationState {
  std::vector<double> x;
  std::vector<double> u;
  int iteration = 0;
};

struct PropagationResult {
  std::vector<double> values;
  /// Per node: whether any information ever reached it.
  std::vector<char> propagated;
  /// Nodes no information can ever reach from the labeled set.
  std::vector<NodeId> unreached;
  int iterations_run = 0;
  bool converged = false;
  /// The absolute convergence threshold derived from the label range.
  double epsilon = 0.0;
};

/// Per-incidence aggregation coefficients, flattened to CSR over nodes.
///
/// For node i and incidence entry toward neighbor j:
///   forward edge j -> i:  z += omega*eta * x_j + omega*tau       * u_j
///   reverse edge i -> j:  z += omega*eta * x_j - omega*eta*tau   * u_j
/// with normalization weights omega (forward) and omega*eta^2 (reverse).
/// The normalized z is the relational neighborhood estimate of node i.
class PropagationPlan {
 public:
  PropagationPlan(const MultiRelationalGraph& graph,
                  const std::vector<RelationParams>& params_by_relation)
      : node_count_(graph.node_count()) {
    if (params_by_relation.size() != graph.relation_count())
      throw Error("need one parameter triple per relation");
    for (RelationId r = 0;
         r < static_cast<RelationId>(params_by_relation.size()); ++r) {
      const RelationParams& p = params_by_relation[r];
      if (!std::isfinite(p.eta) || !std::isfinite(p.tau) || !(p.omega > 0.0) ||
          !std::isfinite(p.omega))
        throw Error("invalid parameters for relation '" +
                    graph.relation(r).name +
                    "' (eta/tau must be finite, omega positive)");
    }
    offsets_.reserve(node_count_ + 1);
    offsets_.push_back(0);
    for (NodeId i = 0; i < static_cast<NodeId>(node_count_); ++i) {
      for (const IncidenceEntry& e : graph.incident(i)) {
        const RelationParams& p = params_by_relation[e.relation];
        neighbor_.push_back(e.neighbor);
        if (e.orientation == Orientation::Forward) {
          value_coeff_.push_back(p.omega * p.eta);
          shift_coeff_.push_back(p.omega * p.tau);
          weight_coeff_.push_back(p.omega);
        } else {
          value_coeff_.push_back(p.omega * p.eta);
          shift_coeff_.push_back(-p.omega * p.eta * p.tau);
          weight_coeff_.push_back(p.omega * p.eta * p.eta);
        }
      }
      offsets_.push_back(neighbor_.size());
    }
  }

  std::size_t node_count() const { return node_count_; }

  /// Normalized neighborhood estimate of node i given state (x, u); returns
  /// false when no propagated neighbor contributes weight.
  bool aggregate(NodeId i, const std::vector<double>& x,
                 const std::vector<double>& u, double* out) const {
    double z = 0.0, r = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      const NodeId j = neighbor_[k];
      z += value_coeff_[k] * x[j] + shift_coeff_[k] * u[j];
      r += weight_coeff_[k] * u[j];
    }
    if (r == 0.0) return false;
    *out = z / r;
    return true;
  }

 private:
  std::size_t node_count_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbor_;
  std::vector<double> value_coeff_;
  std::vector<double> shift_coeff_;
  std::vector<double> weight_coeff_;
};

namespace engine_detail {

template <typename Body>
inline void parallel_over_nodes(std::size_t n, int threads, Body&& body) {
  const int workers =
      std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    body(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&body, begin, end, w] { body(begin, end, w); });
  }
  for (auto& t : pool) t.join();
}

/// One Jacobi sweep reading (cur_x, cur_u) and writing (next_x, next_u);
/// returns the max absolute value change. Labeled nodes are re-clamped to
/// their known values at the end of the sweep.
inline double sweep(const PropagationPlan& plan, const NodeValueMap& labels,
                    const PropagationConfig& cfg,
                    const std::vector<double>& cur_x,
                    const std::vector<double>& cur_u,
                    std::vector<double>& next_x, std::vector<double>& next_u) {
  const std::size_t n = plan.node_count();
  const std::vector<double>& label_value = labels.values_raw();
  const std::vector<char>& is_labeled = labels.present_raw();
  const int workers = std::max(cfg.threads, 1);
  std::vector<double> worker_delta(workers, 0.0);

  parallel_over_nodes(n, cfg.threads, [&](std::size_t begin, std::size_t end,
                                          int w) {
    double max_delta = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const NodeId node = static_cast<NodeId>(i);
      double z;
      double xv;
      double uv = cur_u[i];
      if (!plan.aggregate(node, cur_x, cur_u, &z)) {
        xv = cur_x[i];  // null info at neighbors
      } else {
        if (cur_u[i] == 0.0)
          xv = z;  // null info at the node: adopt the estimate
        else
          xv = (1.0 - cfg.xi) * cur_x[i] + cfg.xi * z;
        uv = 1.0;
      }
      if (is_labeled[i]) xv = label_value[i];  // clamp known values
      next_x[i] = xv;
      next_u[i] = uv;
      max_delta = std::max(max_delta, std::abs(xv - cur_x[i]));
    }
    worker_delta[w] = std::max(worker_delta[w], max_delta);
  });

  double delta = 0.0;
  for (double d : worker_delta) delta = std::max(delta, d);
  return delta;
}

}  // namespace engine_detail

/// Zero-padded initial state: known values on the labeled set, indicator 1
/// there and 0 elsewhere.
inline PropagationState init_state(const MultiRelationalGraph& graph,
                                   const NodeValueMap& labels) {
  if (labels.node_count() != graph.node_count())
    throw Error("label map does not match graph size");
  if (labels.empty()) throw Error("no labeled nodes");
  PropagationState state;
  state.x.assign(graph.node_count(), 0.0);
  state.u.assign(graph.node_count(), 0.0);
  for (NodeId i : labels.labeled()) {
    state.x[i] = labels.at(i);
    state.u[i] = 1.0;
  }
  state.iteration = 0;
  return state;
}

/// Advances the state by one sweep; all reads come from the previous state.
/// Returns the max absolute value change.
inline double step(PropagationState& state, const PropagationPlan& plan,
                   const NodeValueMap& labels, const PropagationConfig& cfg) {
  cfg.validate();
  if (state.x.size() != plan.node_count())
    throw Error("state does not match plan size");
  std::vector<double> next_x(state.x.size());
  std::vector<double> next_u(state.u.size());
  const double delta = engine_detail::sweep(plan, labels, cfg, state.x,
                                            state.u, next_x, next_u);
  state.x.swap(next_x);
  state.u.swap(next_u);
  ++state.iteration;
  return delta;
}

/// Convenience overload building the plan on the fly.
inline double step(PropagationState& state, const MultiRelationalGraph& graph,
                   const std::vector<RelationParams>& params_by_relation,
                   const NodeValueMap& labels, const PropagationConfig& cfg) {
  PropagationPlan plan(graph, params_by_relation);
  return step(state, plan, labels, cfg);
}

/// Nodes information can reach from the labeled set. A directed edge s -> d
/// carries information s => d always (forward weight omega > 0) and d => s
/// only when the relation's eta is nonzero (reverse weight omega * eta^2).
/// Symmetric relations carry information both ways.
inline std::vector<char> reachable_from_labels(
    const MultiRelationalGraph& graph,
    const std::vector<RelationParams>& params_by_relation,
    const NodeValueMap& labels) {
  if (params_by_relation.size() != graph.relation_count())
    throw Error("need one parameter triple per relation");
  std::vector<std::vector<NodeId>> flow(graph.node_count());
  graph.for_each_directed_edge([&](NodeId src, NodeId dst, RelationId rel) {
    flow[src].push_back(dst);
    if (params_by_relation[rel].eta != 0.0) flow[dst].push_back(src);
  });
  std::vector<char> reached(graph.node_count(), 0);
  std::vector<NodeId> queue;
  for (NodeId i : labels.labeled()) {
    reached[i] = 1;
    queue.push_back(i);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId v = queue[head];
    for (NodeId w : flow[v]) {
      if (!reached[w]) {
        reached[w] = 1;
        queue.push_back(w);
      }
    }
  }
  return reached;
}

/// Largest |x_i - z_i| over propagated unlabeled nodes, z_i the normalized
/// neighborhood estimate at the current state.
inline double stationarity_residual(const PropagationState& state,
                                    const PropagationPlan& plan,
                                    const NodeValueMap& labels) {
  const std::vector<char>& is_labeled = labels.present_raw();
  double worst = 0.0;
  for (std::size_t i = 0; i < plan.node_count(); ++i) {
    if (is_labeled[i] || state.u[i] == 0.0) continue;
    double z;
    if (plan.aggregate(static_cast<NodeId>(i), state.x, state.u, &z))
      worst = std::max(worst, std::abs(z - state.x[i]));
  }
  return worst;
}

/// The absolute convergence threshold: epsilon_fraction times the range of
/// the given label values. A degenerate zero range (all labels equal) falls
/// back to epsilon_fraction * max(1, |label|) so constant fields can
/// terminate.
inline double convergence_epsilon(const NodeValueMap& labels,
                                  const PropagationConfig& cfg) {
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (NodeId i : labels.labeled()) {
    const double v = labels.at(i);
    lo = first ? v : std::min(lo, v);
    hi = first ? v : std::max(hi, v);
    first = false;
  }
  if (first) throw Error("no labeled nodes");
  const double range = hi - lo;
  if (range > 0.0) return cfg.epsilon_fraction * range;
  return cfg.epsilon_fraction * std::max(1.0, std::abs(hi));
}

/// Runs the propagation to convergence or the iteration cap.
///
/// Convergence requires (a) every reachable node propagated, (b) the last
/// sweep changed no value by epsilon or more, and (c) the returned iterate's
/// stationarity residual at most epsilon. (c) is verified explicitly with one
/// extra aggregation pass so the result always satisfies the fixed-point
/// contract, not just the sweep-difference test.
inline PropagationResult run(const MultiRelationalGraph& graph,
                             const std::vector<RelationParams>& params,
                             const NodeValueMap& labels,
                             const PropagationConfig& cfg = {}) {
  cfg.validate();
  PropagationPlan plan(graph, params);
  PropagationState state = init_state(graph, labels);
  const double epsilon = convergence_epsilon(labels, cfg);
  const std::vector<char> reachable =
      reachable_from_labels(graph, params, labels);

  std::size_t reachable_count = 0;
  for (char c : reachable) reachable_count += c != 0;

  PropagationResult result;
  result.epsilon = epsilon;

  std::vector<double> next_x(state.x.size());
  std::vector<double> next_u(state.u.size());
  bool converged = false;
  while (state.iteration < cfg.max_iterations) {
    const double delta = engine_detail::sweep(plan, labels, cfg, state.x,
                                              state.u, next_x, next_u);
    state.x.swap(next_x);
    state.u.swap(next_u);
    ++state.iteration;

    std::size_t covered = 0;
    for (std::size_t i = 0; i < reachable.size(); ++i)
      covered += reachable[i] && state.u[i] != 0.0;
    if (covered == reachable_count && delta < epsilon &&
        stationarity_residual(state, plan, labels) <= epsilon) {
      converged = true;
      break;
    }
  }

  result.values = state.x;
  result.propagated.assign(state.u.size(), 0);
  for (std::size_t i = 0; i < state.u.size(); ++i)
    result.propagated[i] = state.u[i] != 0.0;
  for (std::size_t i = 0; i < state.u.size(); ++i)
    if (state.u[i] == 0.0) result.unreached.push_back(static_cast<NodeId>(i));
  result.iterations_run = state.iteration;
  result.converged = converged;
  return result;
}

/// Standard label propagation: the engine under the default parameter triple
/// (tau=0, eta=1, omega=1) for every relation, which ignores relation types
/// and edge directions up to the union of edges.
inline PropagationResult lp_run(const MultiRelationalGraph& graph,
                                const NodeValueMap& labels,
                                const PropagationConfig& cfg = {}) {
  return run(graph, std::vector<RelationParams>(graph.relation_count()),
             labels, cfg);
}

}  // namespace mrp
