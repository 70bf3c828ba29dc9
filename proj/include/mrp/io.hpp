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

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "mrp/error.hpp"
#include "mrp/graph.hpp"

namespace mrp {

/// relation name -> symmetric flag, from the optional metadata file.
using RelationDecls = std::unordered_map<std::string, bool>;

namespace io_detail {

// Strips a trailing '\r' (CRLF input) and tells whether the line is skippable
// (blank or '#' comment).
inline bool skippable(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return i == line.size() || line[i] == '#';
}

inline double parse_double(std::string_view text, std::size_t line_no) {
  double out = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last)
    throw Error("line " + std::to_string(line_no) + ": unparsable value '" +
                std::string(text) + "'");
  if (!std::isfinite(out))
    throw Error("line " + std::to_string(line_no) + ": non-finite value '" +
                std::string(text) + "'");
  return out;
}

}  // namespace io_detail

/// Parses `relation,symmetric` lines (symmetric is `true` or `false`).
inline RelationDecls parse_relation_decls(std::istream& in) {
  RelationDecls decls;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io_detail::skippable(line)) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || comma == 0)
      throw Error("line " + std::to_string(line_no) +
                  ": expected 'relation,true|false'");
    const std::string name = line.substr(0, comma);
    const std::string flag = line.substr(comma + 1);
    bool symmetric;
    if (flag == "true")
      symmetric = true;
    else if (flag == "false")
      symmetric = false;
    else
      throw Error("line " + std::to_string(line_no) +
                  ": symmetry flag must be 'true' or 'false', got '" + flag +
                  "'");
    if (!decls.emplace(name, symmetric).second)
      throw Error("line " + std::to_string(line_no) +
                  ": duplicate declaration for relation '" + name + "'");
  }
  return decls;
}

/// Parses `src<TAB>relation<TAB>dst` edge lines into a graph. Registries are
/// built in first-appearance order. Lines starting with '#' and blank lines
/// are ignored; an input with no edges at all is an error.
inline MultiRelationalGraph parse_edges(std::istream& in,
                                        const RelationDecls& decls = {}) {
  MultiRelationalGraph graph;
  std::string line;
  std::size_t line_no = 0;
  std::size_t edge_count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io_detail::skippable(line)) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos ||
        line.find('\t', t2 + 1) != std::string::npos)
      throw Error("line " + std::to_string(line_no) +
                  ": expected 'src<TAB>relation<TAB>dst'");
    const std::string src = line.substr(0, t1);
    const std::string rel = line.substr(t1 + 1, t2 - t1 - 1);
    const std::string dst = line.substr(t2 + 1);
    if (src.empty() || rel.empty() || dst.empty())
      throw Error("line " + std::to_string(line_no) + ": empty field");
    try {
      const NodeId s = graph.intern_node(src);
      const NodeId d = graph.intern_node(dst);
      const auto decl = decls.find(rel);
      const RelationId r = graph.intern_relation(
          rel, decl != decls.end() && decl->second);
      graph.add_edge(s, r, d);
    } catch (const Error& e) {
      throw Error("line " + std::to_string(line_no) + ": " + e.what());
    }
    ++edge_count;
  }
  if (edge_count == 0) throw Error("empty input: no edges");
  return graph;
}

/// Parses `node,value` lines against an existing graph.
inline NodeValueMap parse_values(std::istream& in,
                                 const MultiRelationalGraph& graph) {
  NodeValueMap values(graph.node_count());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io_detail::skippable(line)) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos || comma == 0)
      throw Error("line " + std::to_string(line_no) +
                  ": expected 'node,value'");
    const std::string label = line.substr(0, comma);
    const auto node = graph.find_node(label);
    if (!node)
      throw Error("line " + std::to_string(line_no) + ": unknown node '" +
                  label + "'");
    const double v = io_detail::parse_double(
        std::string_view(line).substr(comma + 1), line_no);
    try {
      values.set(*node, v);
    } catch (const Error&) {
      throw Error("line " + std::to_string(line_no) +
                  ": duplicate entry for node '" + label + "'");
    }
  }
  return values;
}

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("format_double failed");
  return std::string(buf, ptr);
}

/// Writes edges back out in global insertion order; re-parsing with the same
/// relation declarations reconstructs an identical graph (same registries,
/// same edge order).
inline void write_edges(const MultiRelationalGraph& graph, std::ostream& out) {
  for (const auto& e : graph.edge_log()) {
    out << graph.node_label(e.src) << '\t' << graph.relation(e.relation).name
        << '\t' << graph.node_label(e.dst) << '\n';
  }
}

inline void write_relation_decls(const MultiRelationalGraph& graph,
                                 std::ostream& out) {
  for (RelationId r = 0; r < static_cast<RelationId>(graph.relation_count());
       ++r)
    out << graph.relation(r).name << ','
        << (graph.relation(r).symmetric ? "true" : "false") << '\n';
}

inline void write_values(const MultiRelationalGraph& graph,
                         const NodeValueMap& values, std::ostream& out) {
  for (NodeId n : values.labeled())
    out << graph.node_label(n) << ',' << format_double(values.at(n)) << '\n';
}

}  // namespace mrp
