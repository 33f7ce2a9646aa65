/* Copyright 2026 The tpsched Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tpsched/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace tpsched {

namespace {

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw FormatError(fmt::format("{}: expected an object", where));
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(fmt::format("{}: missing field '{}'", where, key));
  return *it;
}

std::string str(const Json& j, const std::string& where) {
  if (!j.is_string()) throw FormatError(fmt::format("{}: expected a string", where));
  return j.get<std::string>();
}

double num(const Json& j, const std::string& where) {
  if (!j.is_number()) throw FormatError(fmt::format("{}: expected a number", where));
  return j.get<double>();
}

Bytes bytes(const Json& j, const std::string& where) {
  if (j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0)) return j.get<Bytes>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v >= 0 && v == std::floor(v) && v < 1.8e19) return Bytes(v);
  }
  throw FormatError(fmt::format("{}: expected a non-negative integer byte count", where));
}

const Json& array(const Json& j, const std::string& where) {
  if (!j.is_array()) throw FormatError(fmt::format("{}: expected an array", where));
  return j;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Rows after a header that must match `expected`; blank lines and `#` comments skipped.
std::vector<std::pair<std::size_t, std::vector<std::string>>> csv_rows(std::istream& in, const std::string& source,
                                                                       const std::vector<std::string>& expected) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    auto cells = split_csv(line);
    if (!header) {
      if (cells != expected)
        throw FormatError(fmt::format("{}:{}: expected header '{}'", source, lineno, fmt::join(expected, ",")));
      header = true;
      continue;
    }
    if (cells.size() != expected.size())
      throw FormatError(fmt::format("{}:{}: expected {} columns, got {}", source, lineno, expected.size(), cells.size()));
    rows.emplace_back(lineno, std::move(cells));
  }
  if (!header) throw FormatError(fmt::format("{}: empty sample file", source));
  return rows;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

}  // namespace

//---------------------------------------------------------------------------

TaskGraph graph_from_json(const Json& j) {
  TaskGraph g;
  for (const auto& t : array(field(j, "tasks", "dag"), "dag.tasks")) g.add_task(TaskId{str(t, "dag.tasks[]")});
  std::size_t i = 0;
  for (const auto& e : array(field(j, "edges", "dag"), "dag.edges")) {
    const std::string where = fmt::format("dag.edges[{}]", i++);
    const TaskId from{str(field(e, "from", where), where + ".from")};
    const TaskId to{str(field(e, "to", where), where + ".to")};
    try {
      g.add_edge(from, to, bytes(field(e, "bytes", where), where + ".bytes"));
    } catch (const ModelError& err) {
      throw FormatError(fmt::format("{}: {}", where, err.what()));
    }
  }
  g.set_entry(TaskId{str(field(j, "entry", "dag"), "dag.entry")});
  g.set_exit(TaskId{str(field(j, "exit", "dag"), "dag.exit")});
  if (auto it = j.find("duplicates"); it != j.end()) {
    if (!it->is_object()) throw FormatError("dag.duplicates: expected an object");
    for (const auto& [dup, orig] : it->items()) g.set_origin(TaskId{dup}, TaskId{str(orig, "dag.duplicates." + dup)});
  }
  return g;
}

Json to_json(const TaskGraph& graph) {
  Json j;
  j["tasks"] = Json::array();
  for (const auto& t : graph.tasks()) j["tasks"].push_back(t.str());
  j["edges"] = Json::array();
  for (const auto& [e, size] : graph.edges())
    j["edges"].push_back({{"from", e.first.str()}, {"to", e.second.str()}, {"bytes", size}});
  j["entry"] = graph.entry().str();
  j["exit"] = graph.exit().str();
  if (!graph.origins().empty()) {
    j["duplicates"] = Json::object();
    for (const auto& [dup, orig] : graph.origins()) j["duplicates"][dup.str()] = orig.str();
  }
  return j;
}

Cluster cluster_from_json(const Json& j) {
  Cluster c;
  for (const auto& n : array(field(j, "nodes", "cluster"), "cluster.nodes")) c.add_node(NodeId{str(n, "cluster.nodes[]")});
  std::size_t i = 0;
  for (const auto& l : array(field(j, "links", "cluster"), "cluster.links")) {
    const std::string where = fmt::format("cluster.links[{}]", i++);
    const NodeId src{str(field(l, "src", where), where + ".src")};
    const NodeId dst{str(field(l, "dst", where), where + ".dst")};
    LinkProfile p;
    p.a = num(field(l, "a", where), where + ".a");
    p.b = num(field(l, "b", where), where + ".b");
    p.c = num(field(l, "c", where), where + ".c");
    if (l.contains("min_size")) p.min_size = bytes(l["min_size"], where + ".min_size");
    if (l.contains("max_size")) p.max_size = bytes(l["max_size"], where + ".max_size");
    bool both = false;
    if (l.contains("bidirectional")) {
      if (!l["bidirectional"].is_boolean()) throw FormatError(where + ".bidirectional: expected a boolean");
      both = l["bidirectional"].get<bool>();
    }
    try {
      c.set_link(src, dst, p);
      if (both) c.set_link(dst, src, p);
    } catch (const ModelError& err) {
      throw FormatError(fmt::format("{}: {}", where, err.what()));
    }
  }
  return c;
}

Json to_json(const Cluster& cluster) {
  Json j;
  j["nodes"] = Json::array();
  for (const auto& n : cluster.nodes()) j["nodes"].push_back(n.str());
  j["links"] = Json::array();
  for (const auto& [key, p] : cluster.links()) {
    Json l{{"src", key.first.str()}, {"dst", key.second.str()}, {"a", p.a}, {"b", p.b}, {"c", p.c}};
    if (p.min_size) l["min_size"] = *p.min_size;
    if (p.max_size) l["max_size"] = *p.max_size;
    j["links"].push_back(std::move(l));
  }
  return j;
}

ExecutionMatrix matrix_from_json(const Json& j) {
  ExecutionMatrix m;
  const Json& table = field(j, "exec", "matrix");
  if (!table.is_object()) throw FormatError("matrix.exec: expected an object");
  for (const auto& [task, row] : table.items()) {
    if (!row.is_object()) throw FormatError(fmt::format("matrix.exec.{}: expected an object", task));
    for (const auto& [node, t] : row.items())
      m.set(TaskId{task}, NodeId{node}, num(t, fmt::format("matrix.exec.{}.{}", task, node)));
  }
  return m;
}

Json to_json(const ExecutionMatrix& exec) {
  Json table = Json::object();
  for (const auto& [key, t] : exec.entries()) table[key.first.str()][key.second.str()] = t;
  return Json{{"exec", table}};
}

std::map<TaskId, std::vector<Placement>> assignment_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("schedule: expected an object");
  std::map<TaskId, std::vector<Placement>> out;
  for (const auto& [task, v] : j.items()) {
    const std::string where = "schedule." + task;
    auto& list = out[TaskId{task}];
    if (v.is_string()) {
      list.push_back({NodeId{v.get<std::string>()}, 1.0});
      continue;
    }
    for (const auto& p : array(v, where)) {
      if (!p.is_object() || p.size() != 1) throw FormatError(where + ": each placement is a one-key object");
      const auto it = p.begin();
      list.push_back({NodeId{it.key()}, num(it.value(), where + "." + it.key())});
    }
    if (list.empty()) throw FormatError(where + ": no placements");
  }
  return out;
}

Json to_json(const std::map<TaskId, std::vector<Placement>>& assignment) {
  Json j = Json::object();
  for (const auto& [task, list] : assignment) {
    Json arr = Json::array();
    for (const auto& p : list) arr.push_back(Json{{p.node.str(), p.portion}});
    j[task.str()] = std::move(arr);
  }
  return j;
}

Json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError(fmt::format("cannot write '{}'", path.string()));
  out << j.dump(2) << '\n';
}

//---------------------------------------------------------------------------

std::vector<TransferSample> read_transfer_samples(std::istream& in, const std::string& source) {
  std::vector<TransferSample> out;
  for (const auto& [line, cells] : csv_rows(in, source, {"size_bytes", "time_s"})) {
    TransferSample s;
    double size = 0.0;
    if (!parse_number(cells[0], size) || size < 0 || size != std::floor(size))
      throw FormatError(fmt::format("{}:{}: bad size_bytes '{}'", source, line, cells[0]));
    if (!parse_number(cells[1], s.time) || !std::isfinite(s.time))
      throw FormatError(fmt::format("{}:{}: bad time_s '{}'", source, line, cells[1]));
    s.size = Bytes(size);
    out.push_back(s);
  }
  return out;
}

std::vector<ExecSample> read_exec_samples(std::istream& in, const std::string& source) {
  std::vector<ExecSample> out;
  for (const auto& [line, cells] : csv_rows(in, source, {"task", "node", "time_s"})) {
    ExecSample s{TaskId{cells[0]}, NodeId{cells[1]}, 0.0};
    if (cells[0].empty() || cells[1].empty()) throw FormatError(fmt::format("{}:{}: empty task or node", source, line));
    if (!parse_number(cells[2], s.time) || !std::isfinite(s.time))
      throw FormatError(fmt::format("{}:{}: bad time_s '{}'", source, line, cells[2]));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TransferSample> read_transfer_samples(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_transfer_samples(in, path.string());
}

std::vector<ExecSample> read_exec_samples(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_exec_samples(in, path.string());
}

//---------------------------------------------------------------------------

std::string format_analysis(const ResourceTimes& times) {
  const auto est = predicted_throughput(times);
  std::string out = "resource            schedule time (s)\n";
  for (const auto& [r, t] : times)
    out += fmt::format("{:<20}{:>12.6g}{}\n", r.name(), t, r == est.bottleneck ? "  <- bottleneck" : "");
  out += fmt::format("bottleneck: {} ({:.6g} s)\n", est.bottleneck.name(), est.max_schedule_time);
  out += fmt::format("predicted throughput: {:.6g} /s ({:.6g} per 1000 s)\n", est.throughput,
                     per_kilosecond(est.throughput));
  return out;
}

std::string format_simulation(const SimResult& result, const ResourceTimes& predicted) {
  const auto est = predicted_throughput(predicted);
  std::string out = fmt::format("instances completed: {} (warmup {})\n", result.instances_completed, result.warmup);
  out += fmt::format("simulated throughput: {:.6g} per 1000 s\n", per_kilosecond(result.throughput));
  out += fmt::format("predicted throughput: {:.6g} per 1000 s\n", per_kilosecond(est.throughput));
  out += fmt::format("delta: {:+.3f}%\n", 100.0 * (result.throughput - est.throughput) / est.throughput);
  if (result.misrouted_instances) out += fmt::format("misrouted instances: {}\n", result.misrouted_instances);
  out += "resource            busy fraction\n";
  for (const auto& [r, f] : result.busy_fraction) out += fmt::format("{:<20}{:>10.4f}\n", r.name(), f);
  return out;
}

}  // namespace tpsched
