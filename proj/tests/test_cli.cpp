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

// End-to-end checks of the command-line tool: file formats, exit codes and
// the round-trips between subcommands.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

class Workspace {
 public:
  Workspace() {
    dir_ = fs::temp_directory_path() /
           ("mrp_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(dir_);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }

  std::string write(const std::string& name, const std::string& content) {
    std::ofstream out(path(name));
    out << content;
    return path(name);
  }

  CliResult run(const std::string& args) const {
    CliResult result;
    const std::string out_file = path("_stdout");
    const std::string err_file = path("_stderr");
    const std::string cmd = std::string(MRP_CLI_PATH) + " " + args + " > " +
                            out_file + " 2> " + err_file;
    const int status = std::system(cmd.c_str());
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    return result;
  }

  static std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  /// File content with '#' comment lines stripped (header lines carry the
  /// config hash, which legitimately differs between equivalent commands).
  static std::string data_rows(const std::string& path) {
    std::ifstream in(path);
    std::string line, out;
    while (std::getline(in, line))
      if (line.empty() || line[0] != '#') out += line + "\n";
    return out;
  }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path dir_;
};

}  // namespace

TEST_CASE("propagate solves the worked two-node example") {
  Workspace ws;
  ws.write("edges.tsv", "j\tp\ti\n");
  ws.write("values.csv", "j,10\n");
  ws.write("params.json", R"({"relations": {"p": {"eta": 1.0, "tau": -2.0,
                              "omega": 1.0}}})");
  auto r = ws.run("propagate --edges " + ws.path("edges.tsv") + " --values " +
                  ws.path("values.csv") + " --params " +
                  ws.path("params.json") + " --out " + ws.path("out.csv"));
  CHECK(r.exit_code == 0);
  const std::string rows = Workspace::data_rows(ws.path("out.csv"));
  CHECK(rows.find("i,8,true") != std::string::npos);
  CHECK(r.out.find("\"converged\": true") != std::string::npos);
}

TEST_CASE("missing inputs give a usage error with exit code 1") {
  Workspace ws;
  ws.write("edges.tsv", "a\tp\tb\n");
  auto r = ws.run("propagate --edges " + ws.path("edges.tsv") + " --lp --out " +
                  ws.path("out.csv"));
  CHECK(r.exit_code == 1);

  auto missing = ws.run("propagate --edges " + ws.path("edges.tsv") +
                        " --values " + ws.path("nope.csv") + " --lp --out " +
                        ws.path("out.csv"));
  CHECK(missing.exit_code == 1);
}

TEST_CASE("malformed input files give exit code 1") {
  Workspace ws;
  ws.write("edges.tsv", "a\tp\ta\n");  // self-loop
  ws.write("values.csv", "a,1\n");
  auto r = ws.run("propagate --edges " + ws.path("edges.tsv") + " --values " +
                  ws.path("values.csv") + " --lp --out " + ws.path("out.csv"));
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("self-loop") != std::string::npos);
}

TEST_CASE("iteration starvation exits with code 2") {
  Workspace ws;
  ws.write("edges.tsv", "a\tp\tb\nb\tp\tc\nc\tp\td\n");
  ws.write("values.csv", "a,0\nd,9\n");
  auto r = ws.run("propagate --edges " + ws.path("edges.tsv") + " --values " +
                  ws.path("values.csv") + " --lp --max-iterations 1 --out " +
                  ws.path("out.csv"));
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("\"converged\": false") != std::string::npos);
}

TEST_CASE("--lp matches an all-defaults parameter file") {
  Workspace ws;
  ws.write("edges.tsv", "a\tp\tb\nb\tq\tc\nc\tp\td\n");
  ws.write("values.csv", "a,1\nd,4\n");
  ws.write("defaults.json", R"({"relations": {
    "p": {"eta": 1.0, "tau": 0.0, "omega": 1.0},
    "q": {"eta": 1.0, "tau": 0.0, "omega": 1.0}}})");
  auto lp = ws.run("propagate --edges " + ws.path("edges.tsv") + " --values " +
                   ws.path("values.csv") + " --lp --out " + ws.path("lp.csv"));
  auto file = ws.run("propagate --edges " + ws.path("edges.tsv") +
                     " --values " + ws.path("values.csv") + " --params " +
                     ws.path("defaults.json") + " --out " + ws.path("pf.csv"));
  CHECK(lp.exit_code == 0);
  CHECK(file.exit_code == 0);
  CHECK(Workspace::data_rows(ws.path("lp.csv")) ==
        Workspace::data_rows(ws.path("pf.csv")));
}

TEST_CASE("unreached nodes are listed in the summary with exit code 0") {
  Workspace ws;
  ws.write("edges.tsv", "a\tp\tb\nx\tp\ty\n");
  ws.write("values.csv", "a,1\n");
  auto r = ws.run("propagate --edges " + ws.path("edges.tsv") + " --values " +
                  ws.path("values.csv") + " --lp --out " + ws.path("out.csv"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("\"unreached_count\": 2") != std::string::npos);
  CHECK(r.out.find("\"x\"") != std::string::npos);
  CHECK(r.out.find("\"y\"") != std::string::npos);
  const std::string rows = Workspace::data_rows(ws.path("out.csv"));
  CHECK(rows.find("x,0,false") != std::string::npos);
}

TEST_CASE("synth, estimate and propagate round-trip") {
  Workspace ws;
  auto synth = ws.run(
      "synth --nodes 400 --relation step:1:5:0.1 --seed 9 --root-mean 20"
      " --out-edges " + ws.path("edges.tsv") +
      " --out-values " + ws.path("truth.csv") +
      " --out-params " + ws.path("true_params.json"));
  REQUIRE(synth.exit_code == 0);

  auto est = ws.run("estimate --edges " + ws.path("edges.tsv") + " --values " +
                    ws.path("truth.csv") + " --min-pairs 2 --out " +
                    ws.path("params.json"));
  REQUIRE(est.exit_code == 0);
  const std::string params = Workspace::slurp(ws.path("params.json"));
  CHECK(params.find("\"step\"") != std::string::npos);
  CHECK(params.find("\"warning\": false") != std::string::npos);

  // The estimated shift should be close to the generating tau = 5.
  const auto tau_pos = params.find("\"tau\":");
  REQUIRE(tau_pos != std::string::npos);
  const double tau = std::stod(params.substr(tau_pos + 6));
  CHECK(std::abs(tau - 5.0) < 0.05);

  auto prop = ws.run("propagate --edges " + ws.path("edges.tsv") +
                     " --values " + ws.path("truth.csv") + " --params " +
                     ws.path("params.json") + " --out " + ws.path("out.csv"));
  CHECK(prop.exit_code == 0);
}

TEST_CASE("propagate --estimate equals estimate-then-propagate") {
  Workspace ws;
  auto synth = ws.run(
      "synth --nodes 120 --relation a:1:2:0.3 --relation b:1:-1:0.2 --seed 4"
      " --out-edges " + ws.path("edges.tsv") +
      " --out-values " + ws.path("truth.csv"));
  REQUIRE(synth.exit_code == 0);
  // Hide part of the truth to make propagation non-trivial: reuse the first
  // 60 value lines as the visible labels.
  std::istringstream truth(Workspace::slurp(ws.path("truth.csv")));
  std::string line, partial;
  int kept = 0;
  while (std::getline(truth, line)) {
    if (!line.empty() && line[0] != '#' && kept < 60) {
      partial += line + "\n";
      ++kept;
    }
  }
  ws.write("labels.csv", partial);

  auto direct = ws.run("propagate --edges " + ws.path("edges.tsv") +
                       " --values " + ws.path("labels.csv") +
                       " --estimate --out " + ws.path("direct.csv"));
  REQUIRE(direct.exit_code == 0);
  auto est = ws.run("estimate --edges " + ws.path("edges.tsv") + " --values " +
                    ws.path("labels.csv") + " --out " + ws.path("params.json"));
  REQUIRE(est.exit_code == 0);
  auto two_step = ws.run("propagate --edges " + ws.path("edges.tsv") +
                         " --values " + ws.path("labels.csv") + " --params " +
                         ws.path("params.json") + " --out " +
                         ws.path("twostep.csv"));
  REQUIRE(two_step.exit_code == 0);
  CHECK(Workspace::data_rows(ws.path("direct.csv")) ==
        Workspace::data_rows(ws.path("twostep.csv")));
}

TEST_CASE("stats reports zero mean for symmetric relations") {
  Workspace ws;
  ws.write("edges.tsv", "a\tnear\tb\nb\tnear\tc\nc\tnear\td\n");
  ws.write("relations.csv", "near,true\n");
  ws.write("values.csv", "a,1\nb,5\nc,2\nd,8\n");
  auto r = ws.run("stats --edges " + ws.path("edges.tsv") + " --relations " +
                  ws.path("relations.csv") + " --values " +
                  ws.path("values.csv") + " --out " + ws.path("stats.csv") +
                  " --histogram-out " + ws.path("hist.csv") + " --bins 6");
  REQUIRE(r.exit_code == 0);
  const std::string rows = Workspace::data_rows(ws.path("stats.csv"));
  // 3 labeled edges, 6 orientation differences, mean exactly 0.
  CHECK(rows.find("near,3,6,0,") != std::string::npos);
  const std::string hist = Workspace::data_rows(ws.path("hist.csv"));
  CHECK_FALSE(hist.empty());
}

TEST_CASE("stats emits a zero-count row when no pairs are labeled") {
  Workspace ws;
  ws.write("edges.tsv", "a\tp\tb\n");
  ws.write("values.csv", "a,1\n");
  auto r = ws.run("stats --edges " + ws.path("edges.tsv") + " --values " +
                  ws.path("values.csv") + " --out " + ws.path("stats.csv"));
  REQUIRE(r.exit_code == 0);
  CHECK(Workspace::data_rows(ws.path("stats.csv")).find("p,0,0,") !=
        std::string::npos);
}

TEST_CASE("solve-exact agrees with propagate") {
  Workspace ws;
  ws.write("edges.tsv", "a\tp\tb\nb\tp\tc\nc\tq\td\nd\tq\ta\n");
  ws.write("values.csv", "a,0\nc,6\n");
  auto exact = ws.run("solve-exact --edges " + ws.path("edges.tsv") +
                      " --values " + ws.path("values.csv") + " --lp --out " +
                      ws.path("exact.csv"));
  REQUIRE(exact.exit_code == 0);
  auto prop = ws.run("propagate --edges " + ws.path("edges.tsv") +
                     " --values " + ws.path("values.csv") +
                     " --lp --epsilon-fraction 1e-9 --max-iterations 100000"
                     " --out " + ws.path("prop.csv"));
  REQUIRE(prop.exit_code == 0);

  auto parse_rows = [](const std::string& text) {
    std::map<std::string, double> m;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
      if (line.empty() || line.rfind("node,", 0) == 0) continue;
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      m[line.substr(0, c1)] = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    }
    return m;
  };
  auto exact_rows = parse_rows(Workspace::data_rows(ws.path("exact.csv")));
  auto prop_rows = parse_rows(Workspace::data_rows(ws.path("prop.csv")));
  REQUIRE(exact_rows.size() == prop_rows.size());
  for (const auto& [node, value] : exact_rows)
    CHECK(prop_rows.at(node) == Catch::Approx(value).margin(1e-6));
}

TEST_CASE("evaluate scores a prediction file") {
  Workspace ws;
  ws.write("edges.tsv", "a\tp\tb\n");
  ws.write("truth.csv", "a,0\nb,10\n");
  ws.write("pred.csv", "node,value,propagated\na,0,true\nb,5,true\n");
  auto r = ws.run("evaluate --edges " + ws.path("edges.tsv") +
                  " --predicted " + ws.path("pred.csv") + " --truth " +
                  ws.path("truth.csv"));
  REQUIRE(r.exit_code == 0);
  // Last non-empty data row: rmse,mape,nrmse,eval_count,mape_excluded,skipped
  std::istringstream out(r.out);
  std::string line, row;
  while (std::getline(out, line))
    if (!line.empty() && line[0] != '#' && line.rfind("rmse", 0) != 0)
      row = line;
  REQUIRE_FALSE(row.empty());
  std::vector<std::string> fields;
  std::istringstream split(row);
  for (std::string f; std::getline(split, f, ',');) fields.push_back(f);
  REQUIRE(fields.size() == 6);
  CHECK(std::stod(fields[0]) == Catch::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(std::stod(fields[1]) == 0.5);
  CHECK(std::stod(fields[2]) ==
        Catch::Approx(std::sqrt(12.5) / 10.0).epsilon(1e-15));
  CHECK(fields[3] == "2");
  CHECK(fields[4] == "1");
  CHECK(fields[5] == "0");
}

TEST_CASE("mc output mirrors the per-relation table shape and reproduces") {
  Workspace ws;
  auto synth = ws.run(
      "synth --nodes 150 --relation r0:1:3:0.2 --relation r1:1:0:0.4 --seed 2"
      " --out-edges " + ws.path("edges.tsv") +
      " --out-values " + ws.path("truth.csv"));
  REQUIRE(synth.exit_code == 0);
  const std::string cmd = "mc --edges " + ws.path("edges.tsv") + " --truth " +
                          ws.path("truth.csv") +
                          " --ratio 0.8 --trials 3 --seed 6 --out ";
  auto a = ws.run(cmd + ws.path("mc_a.csv"));
  REQUIRE(a.exit_code == 0);
  auto b = ws.run(cmd + ws.path("mc_b.csv"));
  REQUIRE(b.exit_code == 0);
  CHECK(Workspace::slurp(ws.path("mc_a.csv")) ==
        Workspace::slurp(ws.path("mc_b.csv")));

  const std::string rows = Workspace::data_rows(ws.path("mc_a.csv"));
  CHECK(rows.find("LP,r0,") != std::string::npos);
  CHECK(rows.find("LP,r1,") != std::string::npos);
  CHECK(rows.find("LP,union,") != std::string::npos);
  CHECK(rows.find("MrP,,") != std::string::npos);
}

TEST_CASE("config files feed subcommand options") {
  Workspace ws;
  ws.write("edges.tsv", "a\tp\tb\n");
  ws.write("values.csv", "a,2\n");
  ws.write("run.ini", "# run configuration\nedges=" + ws.path("edges.tsv") +
                          "\nvalues=" + ws.path("values.csv") +
                          "\nlp=true\nout=" + ws.path("out.csv") + "\n");
  auto r = ws.run("propagate --config " + ws.path("run.ini"));
  CHECK(r.exit_code == 0);
  CHECK(Workspace::data_rows(ws.path("out.csv")).find("b,2,true") !=
        std::string::npos);

  // Command-line flags take precedence over config values.
  auto o = ws.run("propagate --config " + ws.path("run.ini") + " --out " +
                  ws.path("other.csv"));
  CHECK(o.exit_code == 0);
  CHECK(Workspace::data_rows(ws.path("other.csv")).find("b,2,true") !=
        std::string::npos);
}
