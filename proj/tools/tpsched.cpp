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

// tpsched command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 validation, 3 runtime (deadlock, fit failure).

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tpsched/analysis.hpp"
#include "tpsched/dup.hpp"
#include "tpsched/experiment.hpp"
#include "tpsched/generate.hpp"
#include "tpsched/io.hpp"
#include "tpsched/profiling.hpp"
#include "tpsched/schedulers.hpp"
#include "tpsched/simulator.hpp"
#include "tpsched/split.hpp"

using namespace tpsched;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  const char* env = std::getenv("TPSCHED_SEED");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const auto v = std::strtoull(env, &end, 10);
  if (*end) throw UsageError(fmt::format("TPSCHED_SEED must be an unsigned integer, got '{}'", env));
  return v;
}

struct Inputs {
  std::string dag, cluster, matrix;

  void add(CLI::App* cmd) {
    cmd->add_option("--dag", dag, "task graph JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--cluster", cluster, "cluster JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--matrix", matrix, "execution matrix JSON")->required()->check(CLI::ExistingFile);
  }
  Bundle load() const {
    Bundle b{graph_from_json(read_json(dag)), cluster_from_json(read_json(cluster)), matrix_from_json(read_json(matrix))};
    const auto report = validate(b.graph, b.cluster, b.exec);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    require_ok(report);
    return b;
  }
};

Schedule load_schedule(const std::string& path, const Bundle& b) {
  return manual_schedule(b.graph, b.cluster, assignment_from_json(read_json(path)));
}

//---------------------------------------------------------------------------

struct FitArgs {
  std::vector<std::string> transfers;
  bool undirected = false;
  std::string exec, dag, out_cluster = "cluster.json", out_matrix = "matrix.json";
};

int run_fit(const FitArgs& a) {
  if (a.transfers.empty() && a.exec.empty()) throw UsageError("fit: give at least one --transfer or --exec file");
  if (!a.exec.empty() && a.dag.empty()) throw UsageError("fit: --exec needs --dag to know the task set");

  Cluster cluster;
  std::vector<std::string> failures;
  for (const auto& spec : a.transfers) {
    const auto colon = spec.find(':'), eq = spec.find('=');
    if (colon == std::string::npos || eq == std::string::npos || colon > eq)
      throw UsageError(fmt::format("--transfer expects SRC:DST=FILE, got '{}'", spec));
    const NodeId src{spec.substr(0, colon)}, dst{spec.substr(colon + 1, eq - colon - 1)};
    const fs::path file = spec.substr(eq + 1);
    cluster.add_node(src);
    cluster.add_node(dst);
    try {
      const auto samples = read_transfer_samples(file);
      const auto fit = fit_quadratic(samples);
      cluster.set_link(src, dst, fit.profile);
      if (a.undirected) cluster.set_link(dst, src, fit.profile);
      std::cout << fmt::format("{} -> {}: a={:.9g} b={:.9g} c={:.9g} ({} samples, scaled RSS {:.3g})\n", src.str(),
                               dst.str(), fit.profile.a, fit.profile.b, fit.profile.c, samples.size(),
                               fit.residual_sum_squares);
    } catch (const FitError& e) {
      failures.push_back(fmt::format("{} -> {}: {}", src.str(), dst.str(), e.what()));
    }
  }
  if (!failures.empty()) {
    for (const auto& f : failures) std::cerr << "fit failed: " << f << '\n';
    throw FitError(fmt::format("{} link fit(s) failed", failures.size()));
  }
  if (!a.transfers.empty()) {
    write_json(a.out_cluster, to_json(cluster));
    std::cout << "wrote " << a.out_cluster << '\n';
  }
  if (!a.exec.empty()) {
    const TaskGraph graph = graph_from_json(read_json(a.dag));
    const auto samples = read_exec_samples(fs::path(a.exec));
    if (a.transfers.empty())
      for (const auto& s : samples) cluster.add_node(s.node);
    const auto matrix = build_execution_matrix(samples, graph, cluster);
    write_json(a.out_matrix, to_json(matrix));
    std::cout << "wrote " << a.out_matrix << '\n';
  }
  return 0;
}

struct ScheduleArgs {
  Inputs in;
  std::string algorithm = "tpheft", map, out = "schedule.json";
};

int run_schedule(const ScheduleArgs& a) {
  if (a.algorithm == "manual" && a.map.empty()) throw UsageError("schedule: --algorithm manual needs --map");
  const Bundle b = a.in.load();
  Schedule s;
  if (a.algorithm == "heft") s = heft_schedule(b.graph, b.cluster, b.exec);
  else if (a.algorithm == "tpheft") s = tpheft_schedule(b.graph, b.cluster, b.exec);
  else s = load_schedule(a.map, b);
  write_json(a.out, to_json(s.assignment));
  std::cout << format_analysis(resource_times(s, b.cluster, b.exec)) << "wrote " << a.out << '\n';
  return 0;
}

struct RefineArgs {
  Inputs in;
  std::string schedule, method = "split", out = "refined.json", out_dag;
  std::size_t max_rounds = 10;
};

int run_refine(const RefineArgs& a) {
  if (a.method == "dup" && a.out_dag.empty()) throw UsageError("refine: --method dup needs --out-dag");
  const Bundle b = a.in.load();
  const Schedule s = load_schedule(a.schedule, b);
  const double before = predicted_throughput(resource_times(s, b.cluster, b.exec)).throughput;
  Schedule refined;
  if (a.method == "split") {
    auto res = iterate_split(s, b.cluster, b.exec, a.max_rounds);
    for (const auto& r : res.rounds)
      std::cout << fmt::format("split {} -> {} portion {:.6g}: max {:.6g} -> {:.6g} s\n", r.decision.source_node.str(),
                               r.decision.target_node.str(), r.decision.portion, r.max_before, r.max_after);
    std::cout << fmt::format("{} split round(s)\n", res.rounds.size());
    refined = std::move(res.schedule);
  } else {
    auto res = iterate_dup(s, b.cluster, b.exec, a.max_rounds);
    for (const auto& r : res.rounds)
      std::cout << fmt::format("dup around {} onto {} ({} task(s)): max {:.6g} -> {:.6g} s\n", r.choice.link.name(),
                               r.choice.target.str(), r.choice.src_tasks.size(), r.max_before, r.max_after);
    std::cout << fmt::format("{} dup round(s); stopped: {}\n", res.rounds.size(), res.stop_reason);
    refined = std::move(res.schedule);
    write_json(a.out_dag, to_json(refined.graph));
    std::cout << "wrote " << a.out_dag << '\n';
  }
  const double after = predicted_throughput(resource_times(refined, b.cluster, b.exec)).throughput;
  write_json(a.out, to_json(refined.assignment));
  std::cout << fmt::format("predicted throughput: {:.6g} -> {:.6g} per 1000 s ({:+.2f}%)\n", per_kilosecond(before),
                           per_kilosecond(after), 100.0 * (after - before) / before);
  std::cout << "wrote " << a.out << '\n';
  return 0;
}

struct SimulateArgs {
  Inputs in;
  std::string schedule, mode = "event", placement = "wheel", event_log;
  std::size_t instances = 300;
  std::optional<std::size_t> warmup;
  std::optional<std::uint64_t> seed;
  double interarrival = 0.0, jitter = 0.0;
};

int run_simulate(const SimulateArgs& a) {
  const Bundle b = a.in.load();
  const Schedule s = load_schedule(a.schedule, b);
  SimConfig c;
  c.num_instances = a.instances;
  c.warmup_instances = a.warmup;
  c.seed = a.seed ? *a.seed : default_seed();
  c.input_interarrival = a.interarrival;
  c.jitter = a.jitter;
  c.mode = a.mode == "lockstep" ? SimMode::lockstep : SimMode::event_driven;
  c.hashing.placement = a.placement == "modulo" ? HashPlacement::modulo : HashPlacement::weighted_wheel;
  c.record_events = !a.event_log.empty();
  const SimResult r = simulate(s, b.cluster, b.exec, c);
  std::cout << format_simulation(r, resource_times(s, b.cluster, b.exec));
  if (!a.event_log.empty()) {
    std::ofstream out(a.event_log);
    if (!out) throw FormatError(fmt::format("cannot write '{}'", a.event_log));
    write_event_log_csv(out, r.events);
    std::cout << "wrote " << a.event_log << '\n';
  }
  return 0;
}

struct GenArgs {
  GenParams p;
  std::string shape = "diamond", out_dir = ".", prefix;
  std::optional<std::uint64_t> seed;
};

int run_gen(GenArgs a) {
  try {
    a.p.shape = parse_shape(a.shape);
  } catch (const ModelError& e) {
    throw UsageError(e.what());
  }
  a.p.seed = a.seed ? *a.seed : default_seed();
  const Bundle b = generate(a.p);
  fs::create_directories(a.out_dir);
  const fs::path dir = a.out_dir;
  write_json(dir / (a.prefix + "dag.json"), to_json(b.graph));
  write_json(dir / (a.prefix + "cluster.json"), to_json(b.cluster));
  write_json(dir / (a.prefix + "matrix.json"), to_json(b.exec));
  std::cout << fmt::format("wrote {}-task {} DAG, {} nodes to {}\n", b.graph.size(), a.shape, b.cluster.size(),
                           dir.string());
  return 0;
}

struct ExperimentArgs {
  std::string config, csv;
  bool serial = false;
  std::optional<std::uint64_t> seed;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  Json j = read_json(a.config);
  if (j.is_object() && !j.contains("seed")) j["seed"] = a.seed ? *a.seed : default_seed();
  if (a.seed) j["seed"] = *a.seed;
  ExperimentConfig c;
  try {
    c = experiment_config_from_json(j, fs::path(a.config).parent_path());
  } catch (const ModelError& e) {
    throw UsageError(e.what());
  }
  if (a.serial) c.parallel = false;
  const auto report = run_experiment(c);
  std::cout << format_report_table(report);
  if (!a.csv.empty()) {
    std::ofstream out(a.csv);
    if (!out) throw FormatError(fmt::format("cannot write '{}'", a.csv));
    write_report_csv(out, report);
    std::cout << "wrote " << a.csv << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Throughput-oriented scheduling of pipelined DAG workflows"};
  app.require_subcommand(1);
  std::function<int()> action;

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit link profiles and build the execution matrix from samples");
  fit_cmd->add_option("--transfer", fit.transfers, "SRC:DST=FILE transfer samples (size_bytes,time_s); repeatable");
  fit_cmd->add_flag("--undirected", fit.undirected, "install each fitted profile in both directions");
  fit_cmd->add_option("--exec", fit.exec, "execution samples (task,node,time_s)")->check(CLI::ExistingFile);
  fit_cmd->add_option("--dag", fit.dag, "task graph JSON, required with --exec")->check(CLI::ExistingFile);
  fit_cmd->add_option("--out-cluster", fit.out_cluster, "output cluster JSON")->capture_default_str();
  fit_cmd->add_option("--out-matrix", fit.out_matrix, "output matrix JSON")->capture_default_str();
  fit_cmd->callback([&] { action = [&] { return run_fit(fit); }; });

  ScheduleArgs sched;
  auto* sched_cmd = app.add_subcommand("schedule", "build a schedule and print its predicted throughput");
  sched.in.add(sched_cmd);
  sched_cmd->add_option("--algorithm", sched.algorithm, "heft, tpheft or manual")
      ->check(CLI::IsMember({"heft", "tpheft", "manual"}))
      ->capture_default_str();
  sched_cmd->add_option("--map", sched.map, "task -> node map for manual")->check(CLI::ExistingFile);
  sched_cmd->add_option("--out", sched.out, "output schedule JSON")->capture_default_str();
  sched_cmd->callback([&] { action = [&] { return run_schedule(sched); }; });

  RefineArgs refine;
  auto* refine_cmd = app.add_subcommand("refine", "improve a schedule by node splitting or task duplication");
  refine.in.add(refine_cmd);
  refine_cmd->add_option("--schedule", refine.schedule, "input schedule JSON")->required()->check(CLI::ExistingFile);
  refine_cmd->add_option("--method", refine.method, "split or dup")
      ->check(CLI::IsMember({"split", "dup"}))
      ->capture_default_str();
  refine_cmd->add_option("--max-rounds", refine.max_rounds, "round limit")->capture_default_str();
  refine_cmd->add_option("--out", refine.out, "output schedule JSON")->capture_default_str();
  refine_cmd->add_option("--out-dag", refine.out_dag, "output rewritten task graph (dup)");
  refine_cmd->callback([&] { action = [&] { return run_refine(refine); }; });

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "run a schedule in the discrete-event simulator");
  sim.in.add(sim_cmd);
  sim_cmd->add_option("--schedule", sim.schedule, "schedule JSON")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--instances", sim.instances, "instances to inject")->capture_default_str();
  sim_cmd->add_option("--warmup", sim.warmup, "completions excluded from the measurement");
  sim_cmd->add_option("--seed", sim.seed, "routing and jitter seed (default: TPSCHED_SEED or 1)");
  sim_cmd->add_option("--interarrival", sim.interarrival, "seconds between inputs, 0 saturates")->capture_default_str();
  sim_cmd->add_option("--jitter", sim.jitter, "relative half-width of duration noise")->capture_default_str();
  sim_cmd->add_option("--mode", sim.mode, "event or lockstep")
      ->check(CLI::IsMember({"event", "lockstep"}))
      ->capture_default_str();
  sim_cmd->add_option("--hash-placement", sim.placement, "wheel or modulo")
      ->check(CLI::IsMember({"wheel", "modulo"}))
      ->capture_default_str();
  sim_cmd->add_option("--event-log", sim.event_log, "write the event log CSV here");
  sim_cmd->callback([&] { action = [&] { return run_simulate(sim); }; });

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic DAG, cluster and matrix");
  gen_cmd->add_option("--shape", gen.shape, "diamond, linear, fork-join or layered-random")->capture_default_str();
  gen_cmd->add_option("--length", gen.p.length, "linear: tasks")->capture_default_str();
  gen_cmd->add_option("--width", gen.p.width, "fork-join: branches; layered-random: max layer width")
      ->capture_default_str();
  gen_cmd->add_option("--layers", gen.p.layers, "layered-random: inner layers")->capture_default_str();
  gen_cmd->add_option("--edge-probability", gen.p.edge_probability, "layered-random: extra edge chance")
      ->capture_default_str();
  gen_cmd->add_option("--nodes", gen.p.nodes, "cluster size")->capture_default_str();
  gen_cmd->add_option("--exec-min", gen.p.exec_min, "smallest base execution time (s)")->capture_default_str();
  gen_cmd->add_option("--exec-max", gen.p.exec_max, "largest base execution time (s)")->capture_default_str();
  gen_cmd->add_option("--node-heterogeneity", gen.p.node_heterogeneity, "per-node exec spread")->capture_default_str();
  gen_cmd->add_option("--file-min", gen.p.file_min, "smallest file (bytes)")->capture_default_str();
  gen_cmd->add_option("--file-max", gen.p.file_max, "largest file (bytes)")->capture_default_str();
  gen_cmd->add_option("--link-a", gen.p.link.a, "link quadratic coefficient (s/byte^2)")->capture_default_str();
  gen_cmd->add_option("--link-b", gen.p.link.b, "link linear coefficient (s/byte)")->capture_default_str();
  gen_cmd->add_option("--link-c", gen.p.link.c, "link latency (s)")->capture_default_str();
  gen_cmd->add_option("--link-heterogeneity", gen.p.link_heterogeneity, "per-link spread")->capture_default_str();
  gen_cmd->add_option("--compute-scale", gen.p.compute_scale, "execution time factor")->capture_default_str();
  gen_cmd->add_option("--comm-scale", gen.p.comm_scale, "link coefficient factor")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "generator seed (default: TPSCHED_SEED or 1)");
  gen_cmd->add_option("--out-dir", gen.out_dir, "output directory")->capture_default_str();
  gen_cmd->add_option("--prefix", gen.prefix, "file name prefix");
  gen_cmd->callback([&] { action = [&] { return run_gen(gen); }; });

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "run pipelines over bundles and tabulate throughput");
  exp_cmd->add_option("config", exp.config, "experiment JSON")->required()->check(CLI::ExistingFile);
  exp_cmd->add_option("--csv", exp.csv, "write per-cell CSV here");
  exp_cmd->add_option("--seed", exp.seed, "simulation seed (default: config, TPSCHED_SEED or 1)");
  exp_cmd->add_flag("--serial", exp.serial, "run cells one at a time");
  exp_cmd->callback([&] { action = [&] { return run_experiment_cmd(exp); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nrun with --help for usage\n";
    return 1;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return 3;
  } catch (const DeadlockError& e) {
    std::cerr << "deadlock: " << e.what() << '\n';
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
