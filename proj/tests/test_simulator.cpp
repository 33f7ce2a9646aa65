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

#include <doctest.h>

#include <sstream>
#include <tuple>

#include "fixtures.hpp"
#include "tpsched/io.hpp"
#include "tpsched/simulator.hpp"
#include "tpsched/split.hpp"

using namespace tpsched;
using namespace fixtures;

namespace {

SimResult run(const Schedule& s, const Bundle& b, std::size_t n, SimMode mode = SimMode::event_driven,
              std::uint64_t seed = 1, bool events = false) {
  SimConfig c;
  c.num_instances = n;
  c.mode = mode;
  c.seed = seed;
  c.record_events = events;
  return simulate(s, b.cluster, b.exec, c);
}

Bundle ref_split_spare() {
  Bundle b = ref_bundle();
  b.cluster.add_node(N("n4"));
  for (const auto& n : {N("n1"), N("n2"), N("n3")}) {
    b.cluster.set_link(n, N("n4"), b.cluster.link(N("n1"), N("n2")));
    b.cluster.set_link(N("n4"), n, b.cluster.link(N("n1"), N("n2")));
  }
  for (const auto& t : b.graph.tasks()) b.exec.set(t, N("n4"), b.exec.at(t, N("n3")));
  return b;
}

Schedule ref_t3_split(const Bundle& b, double portion = 0.5) {
  Schedule s = ref_schedule(b);
  s.assignment[T("T3")] = {{N("n3"), 1 - portion}, {N("n4"), portion}};
  return s;
}

/// Checks that no resource runs two items at once and that nothing starts
/// before its inputs are there.
void audit(const SimResult& r, const Schedule& s) {
  using Key = std::tuple<std::uint64_t, TaskId, TaskId, std::size_t>;
  std::map<Key, Seconds> started, exec_end, transfer_end;
  std::map<Resource, std::vector<std::pair<Seconds, Seconds>>> busy;
  for (const auto& e : r.events) {
    const Key k{e.instance, e.task, e.peer, e.replica};
    switch (e.kind) {
      case SimEventKind::exec_start:
      case SimEventKind::transfer_start:
        started[k] = e.time;
        break;
      case SimEventKind::exec_end:
        busy[e.resource].emplace_back(started.at(k), e.time);
        exec_end[{e.instance, e.task, TaskId{}, 0}] = e.time;
        break;
      case SimEventKind::transfer_end:
        busy[e.resource].emplace_back(started.at(k), e.time);
        CHECK(started.at(k) >= exec_end.at({e.instance, e.task, TaskId{}, 0}) - 1e-9);
        transfer_end[{e.instance, e.task, e.peer, 0}] = e.time;
        break;
      default:
        break;
    }
  }
  for (auto& [res, spans] : busy) {
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) CHECK(spans[i].first >= spans[i - 1].second - 1e-9);
  }
  for (const auto& e : r.events) {
    if (e.kind != SimEventKind::exec_start) continue;
    for (const auto& p : s.graph.parents(e.task)) {
      const auto pe = exec_end.find({e.instance, p, TaskId{}, 0});
      REQUIRE(pe != exec_end.end());
      CHECK(e.time >= pe->second - 1e-9);
      const auto te = transfer_end.find({e.instance, p, e.task, 0});
      if (te != transfer_end.end()) CHECK(e.time >= te->second - 1e-9);
    }
  }
}

}  // namespace

TEST_CASE("measured throughput") {
  CHECK(measure_throughput({{0, 20}, {1, 25}, {2, 30}}, 0) == doctest::Approx(0.2));
  CHECK(measure_throughput({{0, 3}, {1, 4}}, 0) == doctest::Approx(1.0));
  CHECK(measure_throughput({{0, 1}, {1, 2}, {2, 4}, {3, 6}}, 1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(measure_throughput({{0, 1}}, 0), ModelError);
  CHECK_THROWS_AS(measure_throughput({{0, 1}, {1, 2}}, 1), ModelError);
}

TEST_CASE("single task at 2 s runs at 0.5 per second") {
  Bundle b;
  b.graph.add_task(T("A"));
  b.graph.set_entry(T("A"));
  b.graph.set_exit(T("A"));
  b.cluster.add_node(N("n1"));
  b.exec.set(T("A"), N("n1"), 2.0);
  const Schedule s = make_schedule(b.graph, {{T("A"), N("n1")}});
  for (auto mode : {SimMode::event_driven, SimMode::lockstep}) {
    const auto r = run(s, b, 50, mode);
    CHECK(r.throughput == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.completions.front().time == doctest::Approx(2.0));
    CHECK(r.busy_fraction.at(Resource::node(N("n1"))) == doctest::Approx(1.0));
  }
}

TEST_CASE("Reference diamond steady state") {
  const Bundle b = ref_bundle();
  const Schedule s = ref_schedule(b);
  const auto ed = run(s, b, 200);
  CHECK(per_kilosecond(ed.throughput) == doctest::Approx(200.0).epsilon(1e-9));
  CHECK(ed.busy_fraction.at(Resource::node(N("n3"))) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ed.busy_fraction.at(Resource::link(N("n2"), N("n3"))) == doctest::Approx(1.0).epsilon(1e-9));
  for (std::size_t i = ed.warmup + 1; i < ed.completions.size(); ++i)
    CHECK(ed.completions[i].time - ed.completions[i - 1].time == doctest::Approx(5.0));

  const auto ls = run(s, b, 60, SimMode::lockstep);
  CHECK(ls.completions[0].time == doctest::Approx(20.0));
  CHECK(ls.completions[1].time == doctest::Approx(25.0));
  CHECK(ls.completions[2].time == doctest::Approx(30.0));
  CHECK(ls.busy_fraction.at(Resource::node(N("n1"))) == doctest::Approx(0.6));
  CHECK(ls.throughput == doctest::Approx(0.2));
}

TEST_CASE("Reference diamond throughput does not depend on the T1/T2 order") {
  Bundle b = ref_bundle();
  // Renaming swaps the tie-break order of the two siblings on n2.
  Bundle r;
  for (const char* t : {"T0", "T2", "T1", "T3"}) r.graph.add_task(T(t));
  r.graph.add_edge(T("T0"), T("T2"), 2'000'000);
  r.graph.add_edge(T("T0"), T("T1"), 1'000'000);
  r.graph.add_edge(T("T2"), T("T3"), 3'000'000);
  r.graph.add_edge(T("T1"), T("T3"), 2'000'000);
  r.graph.set_entry(T("T0"));
  r.graph.set_exit(T("T3"));
  r.cluster = b.cluster;
  r.exec = b.exec;
  CHECK(run(ref_schedule(r), r, 200).throughput == doctest::Approx(run(ref_schedule(b), b, 200).throughput));
}

TEST_CASE("interarrival below capacity sets the rate") {
  const Bundle b = ref_bundle();
  SimConfig c;
  c.num_instances = 100;
  c.input_interarrival = 8.0;
  const auto r = simulate(ref_schedule(b), b.cluster, b.exec, c);
  CHECK(r.throughput == doctest::Approx(1.0 / 8));
  c.input_interarrival = 1.0;
  CHECK(simulate(ref_schedule(b), b.cluster, b.exec, c).throughput == doctest::Approx(0.2));
}

TEST_CASE("jitter stays close to the noiseless rate") {
  const Bundle b = ref_bundle();
  SimConfig c;
  c.num_instances = 400;
  c.jitter = 0.02;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    c.seed = seed;
    const auto r = simulate(ref_schedule(b), b.cluster, b.exec, c);
    CHECK(std::fabs(r.throughput / 0.2 - 1) <= 0.03);
  }
}

TEST_CASE("runs are deterministic per seed") {
  const Bundle b = ref_split_spare();
  const Schedule s = ref_t3_split(b, 0.3);
  const auto a = run(s, b, 200, SimMode::event_driven, 7), c = run(s, b, 200, SimMode::event_driven, 7);
  CHECK(a.throughput == c.throughput);
  CHECK(a.replica_load == c.replica_load);
  REQUIRE(a.completions.size() == c.completions.size());
  for (std::size_t i = 0; i < a.completions.size(); ++i) {
    CHECK(a.completions[i].instance == c.completions[i].instance);
    CHECK(a.completions[i].time == c.completions[i].time);
  }
  // T3 has two parents, so it is hash-routed: seeds do not matter.
  CHECK(run(s, b, 200, SimMode::event_driven, 8).replica_load == a.replica_load);
  CHECK(a.replica_load.at(T("T3")) == std::vector<std::size_t>{140, 60});
}

TEST_CASE("probability routing spreads a single-parent split") {
  const Bundle b = ref_split_spare();
  Schedule s = ref_schedule(b);
  s.assignment[T("T0")] = {{N("n1"), 0.5}, {N("n4"), 0.5}};
  const auto r = run(s, b, 2000, SimMode::event_driven, 3);
  const auto& load = r.replica_load.at(T("T0"));
  CHECK(load[0] + load[1] == 2000);
  CHECK(double(load[0]) / 2000 == doctest::Approx(0.5).epsilon(0.05));
  CHECK(r.misrouted_instances == 0);
}

TEST_CASE("conservation and audits over random schedules") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Bundle b = random_bundle(seed, 7, 5, 3);
    Schedule s = random_schedule(b, seed);
    const auto times = resource_times(s, b.cluster, b.exec);
    if (const auto d = select_split(times, s, b.cluster, b.exec, idle_nodes(times, b.cluster)))
      s = apply_split(s, *d);
    for (auto mode : {SimMode::event_driven, SimMode::lockstep}) {
      const auto r = run(s, b, 60, mode, seed, true);
      CHECK(r.instances_injected == 60);
      CHECK(r.instances_completed == 60);
      CHECK(r.misrouted_instances == 0);
      std::set<std::uint64_t> ids;
      for (const auto& c : r.completions) ids.insert(c.instance);
      CHECK(ids.size() == 60);
      for (const auto& t : s.graph.tasks()) {
        std::size_t total = 0;
        for (auto n : r.replica_load.at(t)) total += n;
        CHECK(total == 60);
      }
      for (const auto& [res, f] : r.busy_fraction) {
        CHECK(f >= 0.0);
        CHECK(f <= 1.0 + 1e-9);
      }
      audit(r, s);
    }
  }
}

TEST_CASE("independent file routing breaks multi-parent assembly") {
  const Bundle b = ref_split_spare();
  SimConfig c;
  c.num_instances = 200;
  c.routing = ReplicaRouting::per_file_independent;
  Schedule s = ref_schedule(b);
  s.assignment[T("T3")] = {{N("n3"), 0.5}, {N("n4"), 0.5}};
  bool broken = false;
  try {
    broken = simulate(s, b.cluster, b.exec, c).misrouted_instances > 0;
  } catch (const DeadlockError&) {
    broken = true;
  }
  CHECK(broken);
  c.routing = ReplicaRouting::per_instance;
  CHECK(simulate(s, b.cluster, b.exec, c).misrouted_instances == 0);
}

TEST_CASE("split prediction holds in simulation") {
  const Bundle b = ref_split_spare();
  const Schedule s = ref_t3_split(b);
  const double pred = predicted_throughput(resource_times(s, b.cluster, b.exec)).throughput;
  CHECK(pred == doctest::Approx(0.25));
  CHECK(run(s, b, 400).throughput == doctest::Approx(pred).epsilon(0.02));
}

TEST_CASE("config validation") {
  const Bundle b = ref_bundle();
  const Schedule s = ref_schedule(b);
  SimConfig c;
  c.num_instances = 10;
  c.warmup_instances = 10;
  CHECK_THROWS_AS(simulate(s, b.cluster, b.exec, c), ModelError);
  c.warmup_instances = 9;
  CHECK_THROWS_AS(simulate(s, b.cluster, b.exec, c), ModelError);
  c.warmup_instances = 2;
  c.jitter = 1.0;
  CHECK_THROWS_AS(simulate(s, b.cluster, b.exec, c), ModelError);
  c.jitter = -0.1;
  CHECK_THROWS_AS(simulate(s, b.cluster, b.exec, c), ModelError);
  c.jitter = 0.0;
  CHECK(simulate(s, b.cluster, b.exec, c).warmup == 2);
}

TEST_CASE("default warmup") {
  const Bundle b = ref_bundle();
  CHECK(default_warmup(b.graph, 300) == 20);
  CHECK(default_warmup(b.graph, 20) == 5);
}

TEST_CASE("event log csv") {
  const Bundle b = ref_bundle();
  const auto r = run(ref_schedule(b), b, 10, SimMode::event_driven, 1, true);
  std::ostringstream out;
  write_event_log_csv(out, r.events);
  const std::string text = out.str();
  CHECK(text.rfind("time,resource,event,instance,task\n", 0) == 0);
  CHECK(text.find(",n1,exec_start,0,T0#0") != std::string::npos);
  CHECK(text.find(",n2->n3,transfer_start,") != std::string::npos);
  CHECK(text.find("T1->T3#0") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == std::ptrdiff_t(r.events.size() + 1));
}
