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

#include "tpsched/experiment.hpp"

#include <algorithm>
#include <future>
#include <ostream>

#include <fmt/format.h>

#include "tpsched/analysis.hpp"
#include "tpsched/dup.hpp"
#include "tpsched/schedulers.hpp"
#include "tpsched/split.hpp"

namespace tpsched {

std::string Pipeline::label() const {
  std::string s;
  switch (scheduler) {
    case SchedulerKind::heft: s = "heft"; break;
    case SchedulerKind::tpheft: s = "tpheft"; break;
    case SchedulerKind::manual: s = "manual"; break;
    case SchedulerKind::one_per_node: s = "one-per-node"; break;
  }
  if (refine) s += *refine == RefineKind::split ? "+split" : "+dup";
  return s;
}

Pipeline parse_pipeline(const std::string& label) {
  Pipeline p;
  const auto plus = label.find('+');
  const std::string head = label.substr(0, plus);
  if (head == "heft") p.scheduler = SchedulerKind::heft;
  else if (head == "tpheft") p.scheduler = SchedulerKind::tpheft;
  else if (head == "manual") p.scheduler = SchedulerKind::manual;
  else if (head == "one-per-node") p.scheduler = SchedulerKind::one_per_node;
  else throw ModelError(fmt::format("unknown scheduler '{}' in pipeline '{}'", head, label));
  if (plus != std::string::npos) {
    const std::string tail = label.substr(plus + 1);
    if (tail == "split") p.refine = RefineKind::split;
    else if (tail == "dup") p.refine = RefineKind::dup;
    else throw ModelError(fmt::format("unknown refiner '{}' in pipeline '{}'", tail, label));
  }
  return p;
}

std::optional<Pipeline> baseline_of(const Pipeline& p, const std::vector<Pipeline>& all) {
  auto present = [&](const Pipeline& q) { return std::find(all.begin(), all.end(), q) != all.end(); };
  if (p.refine) {
    Pipeline base{p.scheduler, std::nullopt};
    if (present(base)) return base;
    return std::nullopt;
  }
  if (p.scheduler == SchedulerKind::tpheft && present(Pipeline{SchedulerKind::heft, std::nullopt}))
    return Pipeline{SchedulerKind::heft, std::nullopt};
  return std::nullopt;
}

//---------------------------------------------------------------------------

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const Json::exception& e) {
    throw FormatError(fmt::format("experiment: field '{}': {}", key, e.what()));
  }
}

GenParams gen_params_from_json(const Json& j) {
  GenParams p;
  p.shape = parse_shape(get_or<std::string>(j, "shape", "diamond"));
  p.length = get_or(j, "length", p.length);
  p.width = get_or(j, "width", p.width);
  p.layers = get_or(j, "layers", p.layers);
  p.edge_probability = get_or(j, "edge_probability", p.edge_probability);
  p.nodes = get_or(j, "nodes", p.nodes);
  p.exec_min = get_or(j, "exec_min", p.exec_min);
  p.exec_max = get_or(j, "exec_max", p.exec_max);
  p.node_heterogeneity = get_or(j, "node_heterogeneity", p.node_heterogeneity);
  p.file_min = get_or(j, "file_min", p.file_min);
  p.file_max = get_or(j, "file_max", p.file_max);
  p.link_heterogeneity = get_or(j, "link_heterogeneity", p.link_heterogeneity);
  p.seed = get_or(j, "seed", p.seed);
  if (auto it = j.find("link"); it != j.end()) {
    p.link.a = get_or(*it, "a", 0.0);
    p.link.b = get_or(*it, "b", 0.0);
    p.link.c = get_or(*it, "c", 0.0);
  }
  return p;
}

Bundle scaled_bundle(const Bundle& b, double compute, double comm) {
  Bundle out{b.graph, Cluster{}, scaled(b.exec, compute)};
  for (const auto& n : b.cluster.nodes()) out.cluster.add_node(n);
  for (const auto& [key, profile] : b.cluster.links()) out.cluster.set_link(key.first, key.second, scaled(profile, comm));
  return out;
}

struct CellResult {
  double predicted = 0.0;
  double simulated = 0.0;
  std::size_t rounds = 0;
};

CellResult run_cell(const ExperimentBundle& eb, const Bundle& b, const Pipeline& p, const ExperimentConfig& config) {
  Schedule s;
  switch (p.scheduler) {
    case SchedulerKind::heft: s = heft_schedule(b.graph, b.cluster, b.exec); break;
    case SchedulerKind::tpheft: s = tpheft_schedule(b.graph, b.cluster, b.exec); break;
    case SchedulerKind::one_per_node: s = one_task_per_node_schedule(b.graph, b.cluster); break;
    case SchedulerKind::manual:
      if (!eb.manual) throw ModelError(fmt::format("bundle '{}' has no manual schedule", eb.name));
      s = manual_schedule(b.graph, b.cluster, *eb.manual);
      break;
  }
  CellResult r;
  if (p.refine == RefineKind::split) {
    auto res = iterate_split(s, b.cluster, b.exec, config.max_rounds);
    r.rounds = res.rounds.size();
    s = std::move(res.schedule);
  } else if (p.refine == RefineKind::dup) {
    auto res = iterate_dup(s, b.cluster, b.exec, config.max_rounds);
    r.rounds = res.rounds.size();
    s = std::move(res.schedule);
  }
  r.predicted = per_kilosecond(predicted_throughput(resource_times(s, b.cluster, b.exec)).throughput);
  r.simulated = per_kilosecond(simulate(s, b.cluster, b.exec, config.sim).throughput);
  return r;
}

std::string scale_label(double v) { return fmt::format("{:g}", v); }

}  // namespace

ExperimentConfig experiment_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw FormatError("experiment: expected an object");
  ExperimentConfig c;
  auto resolve = [&](const Json& v, const std::string& where) {
    if (!v.is_string()) throw FormatError(where + ": expected a path string");
    std::filesystem::path path = v.get<std::string>();
    return path.is_absolute() ? path : base_dir / path;
  };
  if (!j.contains("bundles") || !j["bundles"].is_array()) throw FormatError("experiment: missing array 'bundles'");
  std::size_t i = 0;
  for (const auto& bj : j["bundles"]) {
    const std::string where = fmt::format("experiment.bundles[{}]", i++);
    ExperimentBundle eb;
    eb.name = get_or<std::string>(bj, "name", where);
    if (bj.contains("gen")) {
      eb.bundle = generate(gen_params_from_json(bj["gen"]));
    } else {
      for (const char* key : {"dag", "cluster", "matrix"})
        if (!bj.contains(key)) throw FormatError(fmt::format("{}: needs 'gen' or '{}'", where, key));
      eb.bundle.graph = graph_from_json(read_json(resolve(bj["dag"], where + ".dag")));
      eb.bundle.cluster = cluster_from_json(read_json(resolve(bj["cluster"], where + ".cluster")));
      eb.bundle.exec = matrix_from_json(read_json(resolve(bj["matrix"], where + ".matrix")));
    }
    if (bj.contains("inflate")) {
      const auto& inf = bj["inflate"];
      eb.bundle.cluster = inflate_link(eb.bundle.cluster, NodeId{get_or<std::string>(inf, "src", "")},
                                       NodeId{get_or<std::string>(inf, "dst", "")}, get_or(inf, "factor", 10.0),
                                       get_or(inf, "both_ways", false));
    }
    if (bj.contains("manual")) {
      const auto& m = bj["manual"];
      eb.manual = assignment_from_json(m.is_string() ? read_json(resolve(m, where + ".manual")) : m);
    }
    c.bundles.push_back(std::move(eb));
  }
  if (!j.contains("pipelines") || !j["pipelines"].is_array()) throw FormatError("experiment: missing array 'pipelines'");
  for (const auto& p : j["pipelines"]) {
    if (!p.is_string()) throw FormatError("experiment.pipelines: expected strings");
    c.pipelines.push_back(parse_pipeline(p.get<std::string>()));
  }
  if (c.pipelines.empty()) throw ModelError("experiment: pipeline list is empty");
  if (c.bundles.empty()) throw ModelError("experiment: bundle list is empty");
  c.compute_scales = get_or(j, "compute_scales", c.compute_scales);
  c.comm_scales = get_or(j, "comm_scales", c.comm_scales);
  if (c.compute_scales.empty() || c.comm_scales.empty()) throw ModelError("experiment: empty scale list");
  c.max_rounds = get_or(j, "max_rounds", c.max_rounds);
  c.parallel = get_or(j, "parallel", c.parallel);
  c.sim.num_instances = get_or(j, "instances", c.sim.num_instances);
  c.sim.seed = get_or(j, "seed", c.sim.seed);
  c.sim.jitter = get_or(j, "jitter", c.sim.jitter);
  return c;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.pipelines.empty()) throw ModelError("experiment: pipeline list is empty");
  ExperimentReport report;
  for (const auto& p : config.pipelines) report.columns.push_back(p.label());

  struct RowInput {
    const ExperimentBundle* source;
    Bundle bundle;
  };
  std::vector<RowInput> rows;
  const bool sweep_compute = config.compute_scales.size() > 1, sweep_comm = config.comm_scales.size() > 1;
  for (const auto& eb : config.bundles)
    for (double k : config.compute_scales)
      for (double m : config.comm_scales) {
        std::string name = eb.name;
        if (sweep_compute || k != 1.0) name += " compute x" + scale_label(k);
        if (sweep_comm || m != 1.0) name += " comm x" + scale_label(m);
        report.rows.push_back(name);
        rows.push_back({&eb, scaled_bundle(eb.bundle, k, m)});
      }

  std::vector<std::future<CellResult>> futures;
  const auto policy = config.parallel ? std::launch::async : std::launch::deferred;
  for (const auto& row : rows)
    for (const auto& p : config.pipelines)
      futures.push_back(std::async(policy, [&row, p, &config] { return run_cell(*row.source, row.bundle, p, config); }));

  report.cells.resize(futures.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < config.pipelines.size(); ++c) {
      const std::size_t idx = r * config.pipelines.size() + c;
      Cell& cell = report.cells[idx];
      cell.row = report.rows[r];
      cell.pipeline = report.columns[c];
      try {
        const auto res = futures[idx].get();
        cell.predicted = res.predicted;
        cell.simulated = res.simulated;
        cell.refine_rounds = res.rounds;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }

  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < config.pipelines.size(); ++c) {
      Cell& cell = report.cells[r * config.pipelines.size() + c];
      const auto base = baseline_of(config.pipelines[c], config.pipelines);
      if (!base) continue;
      const auto bc = std::find(config.pipelines.begin(), config.pipelines.end(), *base) - config.pipelines.begin();
      const Cell& reference = report.cells[r * config.pipelines.size() + bc];
      cell.baseline = reference.pipeline;
      if (cell.simulated && reference.simulated && *reference.simulated > 0.0)
        cell.delta_percent = 100.0 * (*cell.simulated - *reference.simulated) / *reference.simulated;
    }
  return report;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "row,pipeline,predicted_per_1000s,simulated_per_1000s,baseline,delta_percent,refine_rounds,error\n";
  auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : std::string(); };
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  for (const auto& c : report.cells)
    out << fmt::format("{},{},{},{},{},{},{},{}\n", quote(c.row), c.pipeline, opt(c.predicted), opt(c.simulated),
                       c.baseline.value_or(""), opt(c.delta_percent), c.refine_rounds, quote(c.error));
}

std::string format_report_table(const ExperimentReport& report) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"DAG"});
  for (const auto& c : report.columns) grid[0].push_back(c);
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    std::vector<std::string> line{report.rows[r]};
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
      const Cell& cell = report.at(r, c);
      std::string s;
      if (!cell.error.empty()) s = "error";
      else {
        s = fmt::format("{:.0f}", *cell.simulated);
        if (cell.delta_percent) s += fmt::format(" ({:+.1f}%)", *cell.delta_percent);
      }
      line.push_back(s);
    }
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(grid[0].size(), 0);
  for (const auto& line : grid)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  std::string out;
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c)
      out += c == 0 ? fmt::format("{:<{}}", line[c], width[c]) : fmt::format("  {:>{}}", line[c], width[c]);
    out += '\n';
  }
  std::string errors;
  for (const auto& cell : report.cells)
    if (!cell.error.empty()) errors += fmt::format("  {} / {}: {}\n", cell.row, cell.pipeline, cell.error);
  if (!errors.empty()) out += "failed cells:\n" + errors;
  out += "throughput in instances per 1000 s; deltas versus the baseline column\n";
  return out;
}

}  // namespace tpsched
