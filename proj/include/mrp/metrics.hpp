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
#include <span>
#include <vector>

#include "mrp/error.hpp"
#include "mrp/graph.hpp"
#include "mrp/rng.hpp"

namespace mrp {

/// Regression error summary over a declared evaluation node set.
///   rmse:  root mean squared error, in feature units.
///   mape:  mean |error / truth| over nodes with nonzero truth; absent when
///          every truth value is zero (mape_excluded counts the skipped).
///   nrmse: rmse divided by the truth range over the eval set; absent when
///          the range is zero.
struct MetricsReport {
  double rmse = 0.0;
  std::optional<double> mape;
  std::optional<double> nrmse;
  std::size_t eval_count = 0;
  std::size_t mape_excluded = 0;
};

inline MetricsReport compute_metrics(std::span<const double> predicted,
                                     const NodeValueMap& truth,
                                     std::span<const NodeId> eval_set) {
  if (eval_set.empty()) throw Error("compute_metrics: empty evaluation set");
  MetricsReport report;
  report.eval_count = eval_set.size();

  double sq_sum = 0.0;
  double ape_sum = 0.0;
  std::size_t ape_count = 0;
  double t_min = 0.0, t_max = 0.0;
  bool first = true;
  for (NodeId i : eval_set) {
    if (i < 0 || static_cast<std::size_t>(i) >= predicted.size())
      throw Error("compute_metrics: eval node outside prediction vector");
    const double t = truth.at(i);
    const double err = predicted[i] - t;
    sq_sum += err * err;
    if (t != 0.0) {
      ape_sum += std::abs(err / t);
      ++ape_count;
    } else {
      ++report.mape_excluded;
    }
    t_min = first ? t : std::min(t_min, t);
    t_max = first ? t : std::max(t_max, t);
    first = false;
  }
  report.rmse = std::sqrt(sq_sum / static_cast<double>(eval_set.size()));
  if (ape_count > 0)
    report.mape = ape_sum / static_cast<double>(ape_count);
  const double range = t_max - t_min;
  if (range > 0.0) report.nrmse = report.rmse / range;
  return report;
}

/// Uniform sample without replacement of round(ratio * |nodes|) node ids,
/// deterministic in the seed, returned sorted. A sample that would be empty
/// or exhaust the universe is an error.
inline std::vector<NodeId> sample_labeled(std::span<const NodeId> nodes,
                                          double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("ratio must be in (0, 1)");
  const std::size_t n = nodes.size();
  const auto k = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(n)));
  if (k == 0) throw Error("sample_labeled: sample would be empty");
  if (k >= n) throw Error("sample_labeled: sample would cover every node");

  std::vector<NodeId> pool(nodes.begin(), nodes.end());
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(pool[i], pool[j]);
  }
  std::vector<NodeId> sample(pool.begin(), pool.begin() + k);
  std::sort(sample.begin(), sample.end());
  return sample;
}

}  // namespace mrp
