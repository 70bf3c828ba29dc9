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
#include <vector>

#include "mrp/error.hpp"
#include "mrp/graph.hpp"

namespace mrp {

/// Precision clamp. A relation whose residuals are identically zero would
/// otherwise get infinite weight and poison the aggregation arithmetic.
inline constexpr double kOmegaMin = 1e-12;
inline constexpr double kOmegaMax = 1e12;

/// Local generative model of one relation type: a neighbor's value maps to
/// the node's value as eta * x + tau, with Gaussian noise of precision omega
/// (inverse variance). The default triple (1, 0, 1) turns the relation into
/// plain neighborhood averaging.
struct RelationParams {
  double eta = 1.0;
  double tau = 0.0;
  double omega = 1.0;
};

inline bool operator==(const RelationParams& a, const RelationParams& b) {
  return a.eta == b.eta && a.tau == b.tau && a.omega == b.omega;
}

struct EstimationOptions {
  /// Keep eta fixed at 1 instead of estimating it.
  bool fix_eta = true;
  /// Below this many labeled pairs the defaults are returned with a warning.
  int min_pairs = 1;
};

struct EstimationResult {
  RelationParams params;
  std::size_t pair_count = 0;
  /// True when the pair set was too small and the defaults were returned.
  bool defaulted = false;
};

/// Visits the labeled value pairs (x_i, x_j) of one relation — one pair per
/// directed edge whose endpoints both carry values, x_i at the edge head and
/// x_j at the tail. Symmetric relations contribute both orientations of each
/// stored edge, stored orientation first. Enumeration order is fixed by edge
/// insertion order.
template <typename F>
inline void for_each_labeled_pair(const MultiRelationalGraph& graph,
                                  const NodeValueMap& values, RelationId rel,
                                  F&& f) {
  const bool sym = graph.relation(rel).symmetric;
  for (const Edge& e : graph.edges(rel)) {
    if (!values.has(e.src) || !values.has(e.dst)) continue;
    const double vs = values.at(e.src);
    const double vd = values.at(e.dst);
    f(vd, vs);
    if (sym) f(vs, vd);
  }
}

/// Maximum-likelihood parameters of one relation from its labeled pairs:
///   eta    = sum (x_i - mu)(x_j - mu) / sum (x_j - mu)^2,
///            mu the mean over all labeled node values (skipped with fix_eta),
///   tau    = mean(x_i - eta x_j),
///   1/omega = mean((x_i - eta x_j - tau)^2), clamped to [kOmegaMin, kOmegaMax].
/// Means are plain 1/n averages. With fewer than min_pairs pairs the default
/// triple is returned and flagged.
inline EstimationResult estimate(const MultiRelationalGraph& graph,
                                 const NodeValueMap& values, RelationId rel,
                                 const EstimationOptions& options = {}) {
  if (options.min_pairs < 1) throw Error("min_pairs must be >= 1");
  if (values.node_count() != graph.node_count())
    throw Error("value map does not match graph size");
  if (values.empty()) throw Error("estimate: no labeled values");

  std::size_t n = 0;
  for_each_labeled_pair(graph, values, rel,
                        [&](double, double) { ++n; });
  if (n < static_cast<std::size_t>(options.min_pairs))
    return EstimationResult{RelationParams{}, n, true};

  double eta = 1.0;
  if (!options.fix_eta) {
    double mu = 0.0;
    std::size_t labeled = 0;
    for (NodeId i : values.labeled()) {
      mu += values.at(i);
      ++labeled;
    }
    mu /= static_cast<double>(labeled);
    double num = 0.0, den = 0.0;
    for_each_labeled_pair(graph, values, rel, [&](double xi, double xj) {
      num += (xi - mu) * (xj - mu);
      den += (xj - mu) * (xj - mu);
    });
    if (den == 0.0) throw Error("degenerate neighbor values for relation '" +
                                graph.relation(rel).name + "'");
    eta = num / den;
  }

  double shift_sum = 0.0;
  for_each_labeled_pair(graph, values, rel, [&](double xi, double xj) {
    shift_sum += xi - eta * xj;
  });
  const double tau = shift_sum / static_cast<double>(n);

  double sq_sum = 0.0;
  for_each_labeled_pair(graph, values, rel, [&](double xi, double xj) {
    const double r = xi - eta * xj - tau;
    sq_sum += r * r;
  });
  const double mean_sq = sq_sum / static_cast<double>(n);
  double omega;
  if (mean_sq <= 0.0)
    omega = kOmegaMax;
  else
    omega = std::min(std::max(1.0 / mean_sq, kOmegaMin), kOmegaMax);

  return EstimationResult{RelationParams{eta, tau, omega}, n, false};
}

/// Parameters of the reverse-direction relation: traversing an edge against
/// its direction applies x -> x/eta - tau/eta with precision eta^2 * omega.
/// reverse(reverse(q)) recovers q (exactly so when eta is a power of two).
inline RelationParams reverse(const RelationParams& p) {
  if (std::abs(p.eta) < 1e-9)
    throw Error("non-invertible scaling: |eta| < 1e-9");
  return RelationParams{1.0 / p.eta, -p.tau / p.eta, p.eta * p.eta * p.omega};
}

/// Moments and histogram of the pairwise differences x_i - eta x_j of one
/// relation's labeled pairs (tau is not subtracted).
struct ResidualStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // population (1/n)
  std::vector<double> bin_edges;   // size bins + 1
  std::vector<std::int64_t> bin_counts;
};

inline ResidualStats residual_stats(const MultiRelationalGraph& graph,
                                    const NodeValueMap& values, RelationId rel,
                                    const RelationParams& params,
                                    int bin_count = 20) {
  if (bin_count < 1) throw Error("bin_count must be >= 1");
  if (values.node_count() != graph.node_count())
    throw Error("value map does not match graph size");
  std::vector<double> diffs;
  for_each_labeled_pair(graph, values, rel, [&](double xi, double xj) {
    diffs.push_back(xi - params.eta * xj);
  });
  if (diffs.empty())
    throw Error("no labeled pairs for relation '" + graph.relation(rel).name +
                "'");

  ResidualStats stats;
  stats.count = diffs.size();
  double sum = 0.0;
  for (double d : diffs) sum += d;
  stats.mean = sum / static_cast<double>(diffs.size());
  double sq = 0.0;
  for (double d : diffs) sq += (d - stats.mean) * (d - stats.mean);
  stats.variance = sq / static_cast<double>(diffs.size());

  double lo = diffs[0], hi = diffs[0];
  for (double d : diffs) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  if (lo == hi) {
    // Degenerate span: a single bin holds everything.
    stats.bin_edges = {lo, hi};
    stats.bin_counts = {static_cast<std::int64_t>(diffs.size())};
    return stats;
  }
  stats.bin_edges.resize(bin_count + 1);
  for (int b = 0; b <= bin_count; ++b)
    stats.bin_edges[b] = lo + (hi - lo) * static_cast<double>(b) /
                                  static_cast<double>(bin_count);
  stats.bin_edges.back() = hi;
  stats.bin_counts.assign(bin_count, 0);
  const double width = (hi - lo) / static_cast<double>(bin_count);
  for (double d : diffs) {
    int b = static_cast<int>((d - lo) / width);
    if (b >= bin_count) b = bin_count - 1;  // d == hi lands in the last bin
    ++stats.bin_counts[b];
  }
  return stats;
}

}  // namespace mrp
