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
#include <optional>
#include <string>
#include <vector>

#include "mrp/engine.hpp"
#include "mrp/error.hpp"
#include "mrp/graph.hpp"
#include "mrp/metrics.hpp"
#include "mrp/params.hpp"

namespace mrp {

enum class MethodKind {
  MrP,            // estimated parameters, all relations
  LpUnion,        // default parameters, all relations
  LpPerRelation,  // default parameters, one relation's edges only
};

struct MethodSpec {
  MethodKind kind = MethodKind::MrP;
  std::string relation;  // only for LpPerRelation

  std::string display_name() const {
    switch (kind) {
      case MethodKind::MrP: return "MrP";
      case MethodKind::LpUnion: return "LP-union";
      case MethodKind::LpPerRelation: return "LP:" + relation;
    }
    return "?";
  }
};

/// Monte-Carlo masking experiment: repeatedly hide a share of the true node
/// values, re-estimate parameters from the visible share, run each method and
/// score it on the hidden nodes it actually reached.
struct ExperimentSpec {
  double label_ratio = 0.8;
  int trials = 1;
  std::uint64_t seed = 0;
  std::vector<MethodSpec> methods;
};

/// Per-method metric means over the trials in which the method ran. Metrics
/// that were undefined in every usable trial stay absent.
struct MethodSummary {
  MethodSpec method;
  std::optional<double> rmse;
  std::optional<double> mape;
  std::optional<double> nrmse;
  int trials_used = 0;
  int trials_failed = 0;
  /// Total hidden nodes a run left unreached, summed over used trials.
  std::int64_t unreached_total = 0;
};

/// One method row per trial, for callers that need the raw sequence.
struct TrialOutcome {
  int trial = 0;
  bool ok = false;
  std::string failure;
  MetricsReport metrics;
  std::int64_t unreached = 0;
};

namespace harness_detail {

inline std::optional<double> mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

}  // namespace harness_detail

/// Runs the experiment. Trial t masks with seed spec.seed + t, so any trial
/// can be reproduced in isolation. Methods are evaluated on the hidden nodes
/// they propagated; hidden nodes left unreached are tallied separately.
inline std::vector<MethodSummary> run_monte_carlo(
    const MultiRelationalGraph& graph, const NodeValueMap& full_values,
    const ExperimentSpec& spec,
    const EstimationOptions& estimation = EstimationOptions{true, 2},
    const PropagationConfig& engine_config = {},
    std::vector<std::vector<TrialOutcome>>* raw_outcomes = nullptr) {
  if (spec.trials < 1) throw Error("trials must be >= 1");
  if (spec.methods.empty()) throw Error("no methods requested");
  engine_config.validate();

  const std::vector<NodeId> universe = full_values.labeled();
  if (universe.size() < 2)
    throw Error("run_monte_carlo: need at least two true values");

  // Per-relation subgraphs are trial-independent; build them once.
  std::vector<std::optional<MultiRelationalGraph>> subgraphs(
      graph.relation_count());
  std::vector<RelationId> method_relation(spec.methods.size(), -1);
  for (std::size_t m = 0; m < spec.methods.size(); ++m) {
    if (spec.methods[m].kind != MethodKind::LpPerRelation) continue;
    const auto rel = graph.find_relation(spec.methods[m].relation);
    if (!rel)
      throw Error("unknown relation '" + spec.methods[m].relation + "'");
    method_relation[m] = *rel;
    if (!subgraphs[*rel]) subgraphs[*rel] = graph.relation_subgraph(*rel);
  }

  std::vector<std::vector<double>> rmse_acc(spec.methods.size());
  std::vector<std::vector<double>> mape_acc(spec.methods.size());
  std::vector<std::vector<double>> nrmse_acc(spec.methods.size());
  std::vector<MethodSummary> out(spec.methods.size());
  for (std::size_t m = 0; m < spec.methods.size(); ++m)
    out[m].method = spec.methods[m];
  if (raw_outcomes) raw_outcomes->assign(spec.methods.size(), {});

  for (int trial = 0; trial < spec.trials; ++trial) {
    const std::uint64_t trial_seed = spec.seed + static_cast<std::uint64_t>(trial);
    const std::vector<NodeId> visible =
        sample_labeled(universe, spec.label_ratio, trial_seed);
    NodeValueMap labels(graph.node_count());
    for (NodeId i : visible) labels.set(i, full_values.at(i));
    std::vector<NodeId> hidden;
    hidden.reserve(universe.size() - visible.size());
    std::set_difference(universe.begin(), universe.end(), visible.begin(),
                        visible.end(), std::back_inserter(hidden));

    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
      TrialOutcome outcome;
      outcome.trial = trial;
      try {
        PropagationResult run_result;
        switch (spec.methods[m].kind) {
          case MethodKind::MrP: {
            std::vector<RelationParams> params(graph.relation_count());
            for (RelationId r = 0;
                 r < static_cast<RelationId>(graph.relation_count()); ++r)
              params[r] = estimate(graph, labels, r, estimation).params;
            run_result = run(graph, params, labels, engine_config);
            break;
          }
          case MethodKind::LpUnion:
            run_result = lp_run(graph, labels, engine_config);
            break;
          case MethodKind::LpPerRelation:
            run_result = lp_run(*subgraphs[method_relation[m]], labels,
                                engine_config);
            break;
        }
        std::vector<NodeId> eval;
        eval.reserve(hidden.size());
        for (NodeId i : hidden) {
          if (run_result.propagated[i])
            eval.push_back(i);
          else
            ++outcome.unreached;
        }
        if (eval.empty()) throw Error("no propagated hidden nodes to score");
        outcome.metrics = compute_metrics(run_result.values, full_values, eval);
        outcome.ok = true;
      } catch (const Error& e) {
        outcome.ok = false;
        outcome.failure = e.what();
      }
      if (outcome.ok) {
        ++out[m].trials_used;
        out[m].unreached_total += outcome.unreached;
        rmse_acc[m].push_back(outcome.metrics.rmse);
        if (outcome.metrics.mape) mape_acc[m].push_back(*outcome.metrics.mape);
        if (outcome.metrics.nrmse)
          nrmse_acc[m].push_back(*outcome.metrics.nrmse);
      } else {
        ++out[m].trials_failed;
      }
      if (raw_outcomes) (*raw_outcomes)[m].push_back(outcome);
    }
  }

  for (std::size_t m = 0; m < spec.methods.size(); ++m) {
    out[m].rmse = harness_detail::mean_of(rmse_acc[m]);
    out[m].mape = harness_detail::mean_of(mape_acc[m]);
    out[m].nrmse = harness_detail::mean_of(nrmse_acc[m]);
  }
  return out;
}

}  // namespace mrp
