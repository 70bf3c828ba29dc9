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

// Command-line front end: ingestion, estimation, propagation, the exact
// solver, synthetic data, residual statistics and Monte-Carlo evaluation.
//
// Exit codes: 0 success, 1 input error, 2 propagation did not converge.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrp/mrp.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNotConverged = 2;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mrp::Error("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw mrp::Error("cannot write '" + path + "'");
  return out;
}

/// First line of every output file: tool version plus a hash of the
/// effective configuration, then the configuration itself.
void write_file_header(std::ostream& out, const std::string& config) {
  out << "# mrp " << mrp::kVersion << " config=" << hex16(fnv1a(config))
      << "\n# config: " << config << "\n";
}

std::string fmt(double v) { return mrp::format_double(v); }

std::string opt_fmt(const std::optional<double>& v) {
  return v ? fmt(*v) : std::string();
}

/// Config-file support: `--config FILE` reads flat `key=value` lines (the
/// keys are the long option names without dashes; '#' comments allowed) and
/// appends them as options the command line did not already set. Precedence
/// is therefore flags over config over defaults.
std::vector<std::string> with_config_applied(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size())
      config_path = args[k + 1];
    else if (args[k].rfind("--config=", 0) == 0)
      config_path = args[k].substr(9);
  }
  if (config_path.empty()) return args;

  std::unordered_set<std::string> given;
  for (const auto& a : args)
    if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));

  std::ifstream in(config_path);
  if (!in) throw mrp::Error("cannot open config file '" + config_path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#' ||
        line[start] == '[')
      continue;
    const auto eq = line.find('=', start);
    if (eq == std::string::npos)
      throw mrp::Error(config_path + ": line " + std::to_string(line_no) +
                       ": expected 'key=value'");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(start, eq - start));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw mrp::Error(config_path + ": line " + std::to_string(line_no) +
                       ": empty key");
    if (key == "config") continue;
    const std::string opt = "--" + key;
    if (!given.count(opt)) args.push_back(opt + "=" + value);
  }
  return args;
}

// ---------------------------------------------------------------------------
// Shared option bundles
// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string edges;
  std::string relations;  // optional metadata file
  std::string values;
};

/// Registers --config so it shows in help and passes validation; the actual
/// expansion happens in with_config_applied() before parsing.
void add_config_option(CLI::App* cmd) {
  static std::deque<std::string> sinks;
  sinks.emplace_back();
  cmd->add_option("--config", sinks.back(),
                  "key=value file supplying any of these options")
      ->check(CLI::ExistingFile);
}

void add_graph_options(CLI::App* cmd, IngestArgs& args) {
  cmd->add_option("--edges", args.edges,
                  "edge list, one 'src<TAB>relation<TAB>dst' per line")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--relations", args.relations,
                  "relation metadata CSV: 'relation,true|false' (symmetric)")
      ->check(CLI::ExistingFile);
}

void add_values_option(CLI::App* cmd, IngestArgs& args,
                       const std::string& help) {
  cmd->add_option("--values", args.values, help)
      ->required()
      ->check(CLI::ExistingFile);
}

mrp::MultiRelationalGraph load_graph(const IngestArgs& args) {
  mrp::RelationDecls decls;
  if (!args.relations.empty()) {
    auto in = open_input(args.relations);
    decls = mrp::parse_relation_decls(in);
  }
  auto in = open_input(args.edges);
  try {
    return mrp::parse_edges(in, decls);
  } catch (const mrp::Error& e) {
    throw mrp::Error(args.edges + ": " + e.what());
  }
}

mrp::NodeValueMap load_values(const std::string& path,
                              const mrp::MultiRelationalGraph& graph) {
  auto in = open_input(path);
  try {
    return mrp::parse_values(in, graph);
  } catch (const mrp::Error& e) {
    throw mrp::Error(path + ": " + e.what());
  }
}

struct EngineArgs {
  mrp::PropagationConfig config;
};

void add_engine_options(CLI::App* cmd, EngineArgs& args) {
  cmd->add_option("--xi", args.config.xi, "damping factor in [0,1]")
      ->capture_default_str();
  cmd->add_option("--epsilon-fraction", args.config.epsilon_fraction,
                  "convergence threshold as a fraction of the label range")
      ->capture_default_str();
  cmd->add_option("--max-iterations", args.config.max_iterations,
                  "iteration cap")
      ->capture_default_str();
  cmd->add_option("--threads", args.config.threads, "worker threads")
      ->capture_default_str();
}

struct EstimateArgs {
  mrp::EstimationOptions options{true, 2};
};

void add_estimation_options(CLI::App* cmd, EstimateArgs& args) {
  cmd->add_flag("--fix-eta,!--no-fix-eta", args.options.fix_eta,
                "keep eta fixed at 1 (default on)")
      ->capture_default_str();
  cmd->add_option("--min-pairs", args.options.min_pairs,
                  "fewer labeled pairs than this falls back to defaults")
      ->capture_default_str();
}

std::string engine_config_str(const EngineArgs& e) {
  std::ostringstream s;
  s << "xi=" << fmt(e.config.xi)
    << " epsilon_fraction=" << fmt(e.config.epsilon_fraction)
    << " max_iterations=" << e.config.max_iterations
    << " threads=" << e.config.threads;
  return s.str();
}

std::string estimation_config_str(const EstimateArgs& e) {
  std::ostringstream s;
  s << "fix_eta=" << (e.options.fix_eta ? "true" : "false")
    << " min_pairs=" << e.options.min_pairs;
  return s.str();
}

// ---------------------------------------------------------------------------
// Parameter files (JSON, round-trippable between estimate and propagate)
// ---------------------------------------------------------------------------

struct NamedParams {
  mrp::RelationParams params;
  std::size_t pair_count = 0;
  bool warning = false;
};

json params_to_json(const mrp::MultiRelationalGraph& graph,
                    const std::vector<NamedParams>& params,
                    const std::string& config) {
  json relations = json::object();
  for (mrp::RelationId r = 0;
       r < static_cast<mrp::RelationId>(graph.relation_count()); ++r) {
    relations[graph.relation(r).name] = {
        {"eta", params[r].params.eta},
        {"tau", params[r].params.tau},
        {"omega", params[r].params.omega},
        {"pair_count", params[r].pair_count},
        {"warning", params[r].warning},
    };
  }
  return json{{"_meta",
               {{"tool", "mrp"},
                {"version", mrp::kVersion},
                {"config", config},
                {"config_hash", hex16(fnv1a(config))}}},
              {"relations", relations}};
}

std::vector<mrp::RelationParams> params_from_json_file(
    const std::string& path, const mrp::MultiRelationalGraph& graph) {
  auto in = open_input(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw mrp::Error(path + ": not a valid parameter file: " + e.what());
  }
  if (!doc.contains("relations") || !doc["relations"].is_object())
    throw mrp::Error(path + ": missing 'relations' object");
  std::vector<mrp::RelationParams> out(graph.relation_count());
  for (mrp::RelationId r = 0;
       r < static_cast<mrp::RelationId>(graph.relation_count()); ++r) {
    const std::string& name = graph.relation(r).name;
    if (!doc["relations"].contains(name)) {
      std::cerr << "warning: no parameters for relation '" << name
                << "', using defaults\n";
      continue;
    }
    const json& p = doc["relations"][name];
    try {
      out[r].eta = p.at("eta").get<double>();
      out[r].tau = p.at("tau").get<double>();
      out[r].omega = p.at("omega").get<double>();
    } catch (const json::exception& e) {
      throw mrp::Error(path + ": relation '" + name + "': " + e.what());
    }
  }
  return out;
}

/// Resolves the parameter source for propagate/solve-exact: exactly one of a
/// parameter file, on-the-fly estimation, or the LP defaults.
struct ParamSource {
  std::string params_path;
  bool estimate_flag = false;
  bool lp_flag = false;

  void add_options(CLI::App* cmd, EstimateArgs& est) {
    auto* file = cmd->add_option("--params", params_path,
                                 "parameter file produced by 'estimate'")
                     ->check(CLI::ExistingFile);
    auto* est_flag =
        cmd->add_flag("--estimate", estimate_flag,
                      "estimate parameters from the given values first");
    auto* lp =
        cmd->add_flag("--lp", lp_flag,
                      "use the default triple (eta=1, tau=0, omega=1): plain "
                      "label propagation");
    file->excludes(est_flag)->excludes(lp);
    est_flag->excludes(lp);
    add_estimation_options(cmd, est);
  }

  std::vector<mrp::RelationParams> resolve(
      const mrp::MultiRelationalGraph& graph, const mrp::NodeValueMap& values,
      const EstimateArgs& est) const {
    if (!params_path.empty()) return params_from_json_file(params_path, graph);
    if (estimate_flag) {
      std::vector<mrp::RelationParams> out(graph.relation_count());
      for (mrp::RelationId r = 0;
           r < static_cast<mrp::RelationId>(graph.relation_count()); ++r) {
        auto res = mrp::estimate(graph, values, r, est.options);
        if (res.defaulted)
          std::cerr << "warning: relation '" << graph.relation(r).name
                    << "' has " << res.pair_count
                    << " labeled pair(s); using defaults\n";
        out[r] = res.params;
      }
      return out;
    }
    if (lp_flag) return std::vector<mrp::RelationParams>(graph.relation_count());
    throw mrp::Error("choose a parameter source: --params, --estimate or --lp");
  }

  std::string config_str() const {
    if (!params_path.empty()) return "params=" + params_path;
    if (estimate_flag) return "params=estimate";
    if (lp_flag) return "params=lp";
    return "params=unset";
  }
};

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_estimate(const IngestArgs& ingest, const EstimateArgs& est,
                 const std::string& out_path) {
  const auto graph = load_graph(ingest);
  const auto values = load_values(ingest.values, graph);
  std::vector<NamedParams> rows(graph.relation_count());
  for (mrp::RelationId r = 0;
       r < static_cast<mrp::RelationId>(graph.relation_count()); ++r) {
    auto res = mrp::estimate(graph, values, r, est.options);
    rows[r] = NamedParams{res.params, res.pair_count, res.defaulted};
    if (res.defaulted)
      std::cerr << "warning: relation '" << graph.relation(r).name << "' has "
                << res.pair_count << " labeled pair(s); using defaults\n";
  }
  const std::string config = "estimate edges=" + ingest.edges +
                             " values=" + ingest.values + " " +
                             estimation_config_str(est);
  auto out = open_output(out_path);
  out << params_to_json(graph, rows, config).dump(2) << "\n";
  return kExitOk;
}

void write_result_csv(std::ostream& out, const mrp::MultiRelationalGraph& graph,
                      const mrp::PropagationResult& result,
                      const std::string& config) {
  write_file_header(out, config);
  out << "node,value,propagated\n";
  for (mrp::NodeId i = 0; i < static_cast<mrp::NodeId>(graph.node_count());
       ++i) {
    out << graph.node_label(i) << ',' << fmt(result.values[i]) << ','
        << (result.propagated[i] ? "true" : "false") << '\n';
  }
}

json run_summary(const mrp::MultiRelationalGraph& graph,
                 const mrp::PropagationResult& result) {
  json unreached = json::array();
  for (mrp::NodeId i : result.unreached) unreached.push_back(graph.node_label(i));
  return json{{"iterations", result.iterations_run},
              {"converged", result.converged},
              {"epsilon", result.epsilon},
              {"unreached_count", result.unreached.size()},
              {"unreached", unreached}};
}

int cmd_propagate(const IngestArgs& ingest, const ParamSource& source,
                  const EstimateArgs& est, const EngineArgs& engine,
                  const std::string& out_path) {
  const auto graph = load_graph(ingest);
  const auto values = load_values(ingest.values, graph);
  const auto params = source.resolve(graph, values, est);
  const auto result = mrp::run(graph, params, values, engine.config);

  const std::string config = "propagate edges=" + ingest.edges + " values=" +
                             ingest.values + " " + source.config_str() + " " +
                             engine_config_str(engine);
  auto out = open_output(out_path);
  write_result_csv(out, graph, result, config);
  std::cout << run_summary(graph, result).dump(2) << "\n";
  return result.converged ? kExitOk : kExitNotConverged;
}

int cmd_solve_exact(const IngestArgs& ingest, const ParamSource& source,
                    const EstimateArgs& est, std::size_t max_unlabeled,
                    const std::string& out_path) {
  const auto graph = load_graph(ingest);
  const auto values = load_values(ingest.values, graph);
  const auto params = source.resolve(graph, values, est);
  const auto solution =
      mrp::solve_exact(graph, params, values, {max_unlabeled});

  mrp::PropagationResult as_result;
  as_result.values.resize(graph.node_count());
  as_result.propagated.assign(graph.node_count(), 1);
  for (mrp::NodeId i = 0; i < static_cast<mrp::NodeId>(graph.node_count());
       ++i)
    as_result.values[i] = solution.at(i);
  const std::string config = "solve-exact edges=" + ingest.edges + " values=" +
                             ingest.values + " " + source.config_str() +
                             " max_unlabeled=" + std::to_string(max_unlabeled);
  auto out = open_output(out_path);
  write_result_csv(out, graph, as_result, config);
  return kExitOk;
}

int cmd_stats(const IngestArgs& ingest, int bins, const std::string& out_path,
              const std::string& hist_path) {
  const auto graph = load_graph(ingest);
  const auto values = load_values(ingest.values, graph);
  const std::string config = "stats edges=" + ingest.edges +
                             " values=" + ingest.values +
                             " bins=" + std::to_string(bins);

  auto out = open_output(out_path);
  write_file_header(out, config);
  out << "relation,edges,pairs,mean,variance\n";
  std::ofstream hist;
  if (!hist_path.empty()) {
    hist = open_output(hist_path);
    write_file_header(hist, config);
    hist << "relation,bin,lo,hi,count\n";
  }
  for (mrp::RelationId r = 0;
       r < static_cast<mrp::RelationId>(graph.relation_count()); ++r) {
    const std::string& name = graph.relation(r).name;
    std::size_t labeled_edges = 0;
    for (const mrp::Edge& e : graph.edges(r))
      if (values.has(e.src) && values.has(e.dst)) ++labeled_edges;
    mrp::ResidualStats stats;
    try {
      stats = mrp::residual_stats(graph, values, r, mrp::RelationParams{},
                                  bins);
    } catch (const mrp::Error&) {
      out << name << ",0,0,,\n";  // no labeled pairs
      continue;
    }
    out << name << ',' << labeled_edges << ',' << stats.count << ','
        << fmt(stats.mean) << ',' << fmt(stats.variance) << '\n';
    if (hist.is_open()) {
      for (std::size_t b = 0; b < stats.bin_counts.size(); ++b)
        hist << name << ',' << b << ',' << fmt(stats.bin_edges[b]) << ','
             << fmt(stats.bin_edges[b + 1]) << ',' << stats.bin_counts[b]
             << '\n';
    }
  }
  return kExitOk;
}

/// Reads a prediction CSV produced by propagate/solve-exact:
/// 'node,value[,propagated]' rows, '#' comments and one optional header row.
struct Predictions {
  std::vector<double> values;
  std::vector<char> present;
  std::vector<char> propagated;
};

Predictions read_predictions(const std::string& path,
                             const mrp::MultiRelationalGraph& graph) {
  Predictions pred;
  pred.values.assign(graph.node_count(), 0.0);
  pred.present.assign(graph.node_count(), 0);
  pred.propagated.assign(graph.node_count(), 1);
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (mrp::io_detail::skippable(line)) continue;
    if (line.rfind("node,", 0) == 0) continue;  // column header
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() < 2)
      throw mrp::Error(path + ": line " + std::to_string(line_no) +
                       ": expected 'node,value[,propagated]'");
    // Labels may contain commas; everything before the last one or two
    // fields belongs to the label.
    bool has_flag = fields.back() == "true" || fields.back() == "false";
    const std::string value_text =
        has_flag ? fields[fields.size() - 2] : fields.back();
    std::string label = fields[0];
    const std::size_t label_fields = fields.size() - (has_flag ? 2 : 1);
    for (std::size_t f = 1; f < label_fields; ++f) label += "," + fields[f];
    const auto node = graph.find_node(label);
    if (!node)
      throw mrp::Error(path + ": line " + std::to_string(line_no) +
                       ": unknown node '" + label + "'");
    pred.values[*node] = mrp::io_detail::parse_double(value_text, line_no);
    pred.present[*node] = 1;
    if (has_flag) pred.propagated[*node] = fields.back() == "true";
  }
  return pred;
}

int cmd_evaluate(const IngestArgs& ingest, const std::string& predicted_path,
                 const std::string& truth_path, const std::string& labels_path,
                 const std::string& out_path) {
  const auto graph = load_graph(ingest);
  const auto truth = load_values(truth_path, graph);
  const auto pred = read_predictions(predicted_path, graph);

  std::vector<char> exclude(graph.node_count(), 0);
  if (!labels_path.empty()) {
    const auto labels = load_values(labels_path, graph);
    for (mrp::NodeId i : labels.labeled()) exclude[i] = 1;
  }
  std::vector<mrp::NodeId> eval;
  std::size_t skipped_unpropagated = 0;
  for (mrp::NodeId i = 0; i < static_cast<mrp::NodeId>(graph.node_count());
       ++i) {
    if (!truth.has(i) || !pred.present[i] || exclude[i]) continue;
    if (!pred.propagated[i]) {
      ++skipped_unpropagated;
      continue;
    }
    eval.push_back(i);
  }
  const auto report = mrp::compute_metrics(pred.values, truth, eval);

  const std::string config = "evaluate predicted=" + predicted_path +
                             " truth=" + truth_path +
                             (labels_path.empty() ? "" : " labels=" + labels_path);
  std::ostringstream body;
  write_file_header(body, config);
  body << "rmse,mape,nrmse,eval_count,mape_excluded,unpropagated_skipped\n";
  body << fmt(report.rmse) << ',' << opt_fmt(report.mape) << ','
       << opt_fmt(report.nrmse) << ',' << report.eval_count << ','
       << report.mape_excluded << ',' << skipped_unpropagated << '\n';
  if (out_path.empty()) {
    std::cout << body.str();
  } else {
    auto out = open_output(out_path);
    out << body.str();
  }
  return kExitOk;
}

std::vector<mrp::MethodSpec> parse_methods(
    const std::vector<std::string>& names,
    const mrp::MultiRelationalGraph& graph) {
  std::vector<mrp::MethodSpec> methods;
  if (names.empty()) {
    // Default: LP on each relation separately, LP on the union, then MrP.
    for (mrp::RelationId r = 0;
         r < static_cast<mrp::RelationId>(graph.relation_count()); ++r)
      methods.push_back({mrp::MethodKind::LpPerRelation,
                         graph.relation(r).name});
    methods.push_back({mrp::MethodKind::LpUnion, ""});
    methods.push_back({mrp::MethodKind::MrP, ""});
    return methods;
  }
  for (const std::string& name : names) {
    if (name == "MrP")
      methods.push_back({mrp::MethodKind::MrP, ""});
    else if (name == "LP-union")
      methods.push_back({mrp::MethodKind::LpUnion, ""});
    else if (name.rfind("LP:", 0) == 0)
      methods.push_back({mrp::MethodKind::LpPerRelation, name.substr(3)});
    else
      throw mrp::Error("unknown method '" + name +
                       "' (expected MrP, LP-union or LP:<relation>)");
  }
  return methods;
}

int cmd_mc(const IngestArgs& ingest, const std::string& truth_path,
           double ratio, int trials, std::uint64_t seed,
           const std::vector<std::string>& method_names,
           const EstimateArgs& est, const EngineArgs& engine,
           const std::string& out_path) {
  const auto graph = load_graph(ingest);
  const auto truth = load_values(truth_path, graph);

  mrp::ExperimentSpec spec;
  spec.label_ratio = ratio;
  spec.trials = trials;
  spec.seed = seed;
  spec.methods = parse_methods(method_names, graph);

  const auto summaries =
      mrp::run_monte_carlo(graph, truth, spec, est.options, engine.config);

  std::ostringstream cfg;
  cfg << "mc edges=" << ingest.edges << " truth=" << truth_path
      << " ratio=" << fmt(ratio) << " trials=" << trials << " seed=" << seed
      << " " << estimation_config_str(est) << " " << engine_config_str(engine)
      << " methods=";
  for (std::size_t m = 0; m < spec.methods.size(); ++m)
    cfg << (m ? "+" : "") << spec.methods[m].display_name();

  auto out = open_output(out_path);
  write_file_header(out, cfg.str());
  out << "method,relation,rmse,mape,nrmse,trials_used\n";
  std::cout << "ratio " << fmt(ratio) << ", " << trials << " trial(s), seed "
            << seed << "\n";
  std::printf("%-10s %-18s %12s %12s %12s %8s\n", "method", "relation", "rmse",
              "mape", "nrmse", "trials");
  for (const auto& s : summaries) {
    std::string method, relation;
    switch (s.method.kind) {
      case mrp::MethodKind::MrP:
        method = "MrP";
        break;
      case mrp::MethodKind::LpUnion:
        method = "LP";
        relation = "union";
        break;
      case mrp::MethodKind::LpPerRelation:
        method = "LP";
        relation = s.method.relation;
        break;
    }
    out << method << ',' << relation << ',' << opt_fmt(s.rmse) << ','
        << opt_fmt(s.mape) << ',' << opt_fmt(s.nrmse) << ',' << s.trials_used
        << '\n';
    auto cell = [](const std::optional<double>& v) {
      return v ? mrp::format_double(*v).substr(0, 12) : std::string("-");
    };
    std::printf("%-10s %-18s %12s %12s %12s %8d\n", method.c_str(),
                relation.c_str(), cell(s.rmse).c_str(), cell(s.mape).c_str(),
                cell(s.nrmse).c_str(), s.trials_used);
    if (s.unreached_total > 0)
      std::cout << "note: " << s.method.display_name() << " left "
                << s.unreached_total
                << " hidden node(s) unreached across trials (excluded from "
                   "scoring)\n";
    if (s.trials_failed > 0)
      std::cerr << "note: " << s.method.display_name() << " skipped "
                << s.trials_failed << " trial(s)\n";
  }
  return kExitOk;
}

mrp::SynthRelationSpec parse_relation_spec(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = text.find(':', start);
    if (colon == std::string::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, colon - start));
    start = colon + 1;
  }
  if (parts.size() < 4 || parts.size() > 5)
    throw mrp::Error("relation spec must be name:eta:tau:sigma[:extra_edges], "
                     "got '" + text + "'");
  mrp::SynthRelationSpec spec;
  spec.name = parts[0];
  spec.eta = mrp::io_detail::parse_double(parts[1], 0);
  spec.tau = mrp::io_detail::parse_double(parts[2], 0);
  spec.sigma = mrp::io_detail::parse_double(parts[3], 0);
  if (parts.size() == 5) spec.extra_edge_count = std::stoi(parts[4]);
  return spec;
}

int cmd_synth(int nodes, const std::vector<std::string>& relation_specs,
              double root_mean, double root_std, std::uint64_t seed,
              const std::string& out_edges, const std::string& out_values,
              const std::string& out_params) {
  mrp::SynthSpec spec;
  spec.node_count = nodes;
  spec.root_value_mean = root_mean;
  spec.root_value_std = root_std;
  spec.seed = seed;
  for (const auto& text : relation_specs)
    spec.relations.push_back(parse_relation_spec(text));

  const auto data = mrp::generate(spec);

  std::ostringstream cfg;
  cfg << "synth nodes=" << nodes << " seed=" << seed
      << " root_mean=" << fmt(root_mean) << " root_std=" << fmt(root_std)
      << " relations=";
  for (std::size_t r = 0; r < relation_specs.size(); ++r)
    cfg << (r ? "+" : "") << relation_specs[r];

  {
    auto out = open_output(out_edges);
    write_file_header(out, cfg.str());
    mrp::write_edges(data.graph, out);
  }
  {
    auto out = open_output(out_values);
    write_file_header(out, cfg.str());
    mrp::write_values(data.graph, data.values, out);
  }
  if (!out_params.empty()) {
    std::vector<NamedParams> rows;
    for (const auto& r : spec.relations) {
      const double var = r.sigma * r.sigma;
      const double omega = var > 0.0
                               ? std::min(std::max(1.0 / var, mrp::kOmegaMin),
                                          mrp::kOmegaMax)
                               : mrp::kOmegaMax;
      rows.push_back(
          NamedParams{mrp::RelationParams{r.eta, r.tau, omega}, 0, false});
    }
    auto out = open_output(out_params);
    out << params_to_json(data.graph, rows, cfg.str()).dump(2) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-relational value propagation on directed graphs"};
  app.require_subcommand(1);
  add_config_option(&app);
  std::function<int()> action;

  // --- estimate ---
  {
    auto* cmd = app.add_subcommand(
        "estimate", "estimate per-relation parameters from labeled values");
    add_config_option(cmd);
    auto ingest = std::make_shared<IngestArgs>();
    auto est = std::make_shared<EstimateArgs>();
    auto out = std::make_shared<std::string>();
    add_graph_options(cmd, *ingest);
    add_values_option(cmd, *ingest, "labeled node values CSV (node,value)");
    add_estimation_options(cmd, *est);
    cmd->add_option("--out", *out, "output parameter file (JSON)")->required();
    cmd->callback([=, &action] {
      action = [=] { return cmd_estimate(*ingest, *est, *out); };
    });
  }

  // --- propagate ---
  {
    auto* cmd = app.add_subcommand(
        "propagate", "complete missing node values by propagation");
    add_config_option(cmd);
    auto ingest = std::make_shared<IngestArgs>();
    auto source = std::make_shared<ParamSource>();
    auto est = std::make_shared<EstimateArgs>();
    auto engine = std::make_shared<EngineArgs>();
    auto out = std::make_shared<std::string>();
    add_graph_options(cmd, *ingest);
    add_values_option(cmd, *ingest, "labeled node values CSV (node,value)");
    source->add_options(cmd, *est);
    add_engine_options(cmd, *engine);
    cmd->add_option("--out", *out, "output results CSV")->required();
    cmd->callback([=, &action] {
      action = [=] {
        return cmd_propagate(*ingest, *source, *est, *engine, *out);
      };
    });
  }

  // --- solve-exact ---
  {
    auto* cmd = app.add_subcommand(
        "solve-exact", "exact small-graph solution of the propagation "
                       "fixed point (verification oracle)");
    add_config_option(cmd);
    auto ingest = std::make_shared<IngestArgs>();
    auto source = std::make_shared<ParamSource>();
    auto est = std::make_shared<EstimateArgs>();
    auto cap = std::make_shared<std::size_t>(2000);
    auto out = std::make_shared<std::string>();
    add_graph_options(cmd, *ingest);
    add_values_option(cmd, *ingest, "labeled node values CSV (node,value)");
    source->add_options(cmd, *est);
    cmd->add_option("--max-unlabeled", *cap, "unlabeled node cap")
        ->capture_default_str();
    cmd->add_option("--out", *out, "output results CSV")->required();
    cmd->callback([=, &action] {
      action = [=] {
        return cmd_solve_exact(*ingest, *source, *est, *cap, *out);
      };
    });
  }

  // --- stats ---
  {
    auto* cmd = app.add_subcommand(
        "stats", "per-relation statistics of labeled pair differences");
    add_config_option(cmd);
    auto ingest = std::make_shared<IngestArgs>();
    auto bins = std::make_shared<int>(20);
    auto out = std::make_shared<std::string>();
    auto hist = std::make_shared<std::string>();
    add_graph_options(cmd, *ingest);
    add_values_option(cmd, *ingest, "labeled node values CSV (node,value)");
    cmd->add_option("--bins", *bins, "histogram bin count")
        ->capture_default_str();
    cmd->add_option("--out", *out, "output statistics CSV")->required();
    cmd->add_option("--histogram-out", *hist, "optional histogram CSV");
    cmd->callback([=, &action] {
      action = [=] { return cmd_stats(*ingest, *bins, *out, *hist); };
    });
  }

  // --- evaluate ---
  {
    auto* cmd = app.add_subcommand(
        "evaluate", "score a prediction CSV against ground truth");
    add_config_option(cmd);
    auto ingest = std::make_shared<IngestArgs>();
    auto predicted = std::make_shared<std::string>();
    auto truth = std::make_shared<std::string>();
    auto labels = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    add_graph_options(cmd, *ingest);
    cmd->add_option("--predicted", *predicted,
                    "prediction CSV (node,value[,propagated])")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--truth", *truth, "ground-truth values CSV")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--labels", *labels,
                    "values visible to the method; excluded from scoring")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", *out, "output CSV (default: stdout)");
    cmd->callback([=, &action] {
      action = [=] {
        return cmd_evaluate(*ingest, *predicted, *truth, *labels, *out);
      };
    });
  }

  // --- mc ---
  {
    auto* cmd = app.add_subcommand(
        "mc", "Monte-Carlo masking experiment over methods");
    add_config_option(cmd);
    auto ingest = std::make_shared<IngestArgs>();
    auto truth = std::make_shared<std::string>();
    auto ratio = std::make_shared<double>(0.8);
    auto trials = std::make_shared<int>(50);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto methods = std::make_shared<std::vector<std::string>>();
    auto est = std::make_shared<EstimateArgs>();
    auto engine = std::make_shared<EngineArgs>();
    auto out = std::make_shared<std::string>();
    add_graph_options(cmd, *ingest);
    cmd->add_option("--truth", *truth, "full ground-truth values CSV")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--ratio", *ratio, "labeled ratio in (0,1)")
        ->capture_default_str();
    cmd->add_option("--trials", *trials, "number of Monte-Carlo trials")
        ->capture_default_str();
    cmd->add_option("--seed", *seed, "base seed; trial t uses seed+t")
        ->capture_default_str();
    cmd->add_option("--methods", *methods,
                    "methods: MrP, LP-union, LP:<relation> (default: LP per "
                    "relation, LP-union, MrP)")
        ->delimiter(',');
    add_estimation_options(cmd, *est);
    add_engine_options(cmd, *engine);
    cmd->add_option("--out", *out, "output results CSV")->required();
    cmd->callback([=, &action] {
      action = [=] {
        return cmd_mc(*ingest, *truth, *ratio, *trials, *seed, *methods, *est,
                      *engine, *out);
      };
    });
  }

  // --- synth ---
  {
    auto* cmd = app.add_subcommand(
        "synth", "generate a synthetic graph with known parameters");
    add_config_option(cmd);
    auto nodes = std::make_shared<int>(100);
    auto rels = std::make_shared<std::vector<std::string>>();
    auto root_mean = std::make_shared<double>(0.0);
    auto root_std = std::make_shared<double>(1.0);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto out_edges = std::make_shared<std::string>();
    auto out_values = std::make_shared<std::string>();
    auto out_params = std::make_shared<std::string>();
    cmd->add_option("--nodes", *nodes, "node count (>= 2)")
        ->capture_default_str();
    cmd->add_option("--relation", *rels,
                    "relation spec name:eta:tau:sigma[:extra_edges]; repeat "
                    "for several relations")
        ->required();
    cmd->add_option("--root-mean", *root_mean, "root value mean")
        ->capture_default_str();
    cmd->add_option("--root-std", *root_std, "root value std deviation")
        ->capture_default_str();
    cmd->add_option("--seed", *seed, "generator seed")->capture_default_str();
    cmd->add_option("--out-edges", *out_edges, "output edge file")->required();
    cmd->add_option("--out-values", *out_values, "output values CSV")
        ->required();
    cmd->add_option("--out-params", *out_params,
                    "optional ground-truth parameter file (JSON)");
    cmd->callback([=, &action] {
      action = [=] {
        return cmd_synth(*nodes, *rels, *root_mean, *root_std, *seed,
                         *out_edges, *out_values, *out_params);
      };
    });
  }

  try {
    std::vector<std::string> args = with_config_applied(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 expects reversed args
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  } catch (const mrp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    return action();
  } catch (const mrp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}
