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

#include "fixtures.hpp"
#include "tpsched/dup.hpp"
#include "tpsched/split.hpp"

using namespace tpsched;
using namespace fixtures;

namespace {

/// Four nodes, 1 s per task everywhere (`slow_exec` for S on n4), 1 s/MB
/// links except n2 -> n3 at 10 s/MB.
Bundle four_nodes(const std::vector<std::tuple<std::string, std::string, Bytes>>& edges, const std::string& entry,
                  const std::string& exit, Seconds slow_exec = 1.0) {
  Bundle b;
  for (const auto& [p, c, size] : edges) {
    if (!b.graph.contains(T(p))) b.graph.add_task(T(p));
    if (!b.graph.contains(T(c))) b.graph.add_task(T(c));
    b.graph.add_edge(T(p), T(c), size);
  }
  b.graph.set_entry(T(entry));
  b.graph.set_exit(T(exit));
  for (const char* n : {"n1", "n2", "n3", "n4"}) b.cluster.add_node(N(n));
  for (const auto& s : b.cluster.nodes())
    for (const auto& d : b.cluster.nodes())
      if (s != d) b.cluster.set_link(s, d, LinkProfile{0.0, 1e-6, 0.0, std::nullopt, std::nullopt});
  b.cluster.set_link(N("n2"), N("n3"), LinkProfile{0.0, 1e-5, 0.0, std::nullopt, std::nullopt});
  for (const auto& t : b.graph.tasks())
    for (const auto& n : b.cluster.nodes()) b.exec.set(t, n, t == T("S") && n == N("n4") ? slow_exec : 1.0);
  return b;
}

/// p1, p2 -> S -> c1, c2 with only S -> c2 crossing the slow link.
Bundle fan(Seconds slow_exec = 1.0) {
  return four_nodes({{"E", "p1", 1'000'000},
                     {"E", "p2", 1'000'000},
                     {"p1", "S", 1'000'000},
                     {"p2", "S", 1'000'000},
                     {"S", "c1", 1'000'000},
                     {"S", "c2", 2'000'000},
                     {"c1", "X", 1'000'000},
                     {"c2", "X", 1'000'000}},
                    "E", "X", slow_exec);
}

std::map<TaskId, NodeId> fan_map() {
  return {{T("E"), N("n1")}, {T("p1"), N("n1")}, {T("p2"), N("n1")}, {T("S"), N("n2")},
          {T("c1"), N("n2")}, {T("X"), N("n2")}, {T("c2"), N("n3")}};
}

}  // namespace

TEST_CASE("duplicating a fan-out source bypasses the slow link") {
  const Bundle b = fan();
  const Schedule s = make_schedule(b.graph, fan_map());
  const auto times = resource_times(s, b.cluster, b.exec);
  REQUIRE(bottleneck(times).first == Resource::link(N("n2"), N("n3")));
  CHECK(bottleneck(times).second == doctest::Approx(20.0));

  const auto choice = find_best_dup_node(times, s, b.cluster, b.exec, idle_nodes(times, b.cluster));
  REQUIRE(choice);
  CHECK(choice->target == N("n4"));
  CHECK(choice->src_tasks == std::vector<TaskId>{T("S")});
  CHECK(choice->rerouted_children.at(T("S")) == std::vector<TaskId>{T("c2")});
  CHECK(choice->predicted_cost < choice->bottleneck_time);

  const Schedule out = apply_duplication(s, *choice);
  const TaskGraph& g = out.graph;
  REQUIRE(g.contains(T("S-dup")));
  CHECK(g.origin(T("S-dup")) == T("S"));
  CHECK(out.node_of(T("S-dup")) == N("n4"));
  CHECK(g.parents(T("S-dup")) == std::vector<TaskId>{T("p1"), T("p2")});
  CHECK(g.file_size(T("p1"), T("S-dup")) == g.file_size(T("p1"), T("S")));
  CHECK(g.parents(T("c2")) == std::vector<TaskId>{T("S-dup")});
  CHECK(g.file_size(T("S-dup"), T("c2")) == Bytes(2'000'000));
  CHECK(g.children(T("S")) == std::vector<TaskId>{T("c1")});
  CHECK(g.topological_order().has_value());

  const auto after = resource_times(out, b.cluster, b.exec);
  CHECK(!after.contains(Resource::link(N("n2"), N("n3"))));
  CHECK(max_schedule_time(after) < 20.0);
  CHECK(garbage_collect_zombies(out) == out);
}

TEST_CASE("a source left without children is collected") {
  const Bundle b = four_nodes({{"E", "S", 1'000'000}, {"S", "c", 2'000'000}, {"c", "X", 1'000'000}}, "E", "X");
  const Schedule s = make_schedule(b.graph, {{T("E"), N("n1")}, {T("S"), N("n2")}, {T("c"), N("n3")}, {T("X"), N("n3")}});
  const auto res = iterate_dup(s, b.cluster, b.exec, 1);
  REQUIRE(res.rounds.size() == 1);
  CHECK(res.rounds[0].collected == std::vector<TaskId>{T("S")});
  const TaskGraph& g = res.schedule.graph;
  CHECK(!g.contains(T("S")));
  CHECK(!res.schedule.assignment.contains(T("S")));
  CHECK(g.parents(T("c")) == std::vector<TaskId>{T("S-dup")});
  CHECK(fully_connected(g));
  CHECK(validate_schedule(res.schedule, b.cluster).ok());
}

TEST_CASE("orphaned entry hands over to its copy") {
  const Bundle b = four_nodes({{"S", "c", 2'000'000}, {"c", "X", 1'000'000}}, "S", "X");
  const Schedule s = make_schedule(b.graph, {{T("S"), N("n2")}, {T("c"), N("n3")}, {T("X"), N("n3")}});
  const auto res = iterate_dup(s, b.cluster, b.exec, 1);
  REQUIRE(res.rounds.size() == 1);
  CHECK(res.schedule.graph.entry() == T("S-dup"));
  CHECK(fully_connected(res.schedule.graph));
}

TEST_CASE("no improving candidate means no duplication") {
  const Bundle b = fan(1000.0);
  const Schedule s = make_schedule(b.graph, fan_map());
  const auto times = resource_times(s, b.cluster, b.exec);
  CHECK(!find_best_dup_node(times, s, b.cluster, b.exec, idle_nodes(times, b.cluster)));
  const auto res = iterate_dup(s, b.cluster, b.exec, 10);
  CHECK(res.rounds.empty());
  CHECK(res.schedule == s);
  CHECK(!res.stop_reason.empty());
}

TEST_CASE("node bottleneck ends duplication immediately") {
  const Bundle b = ref_bundle();
  const Schedule s = ref_schedule(b);
  const auto times = resource_times(s, b.cluster, b.exec);
  CHECK(!find_best_dup_node(times, s, b.cluster, b.exec, {N("n1")}));
  const auto res = iterate_dup(s, b.cluster, b.exec, 10);
  CHECK(res.rounds.empty());
  CHECK(res.schedule == s);
}

TEST_CASE("garbage collection without zombies is the identity") {
  const Bundle b = ref_bundle();
  std::vector<TaskId> removed;
  CHECK(garbage_collect_zombies(ref_schedule(b), &removed) == ref_schedule(b));
  CHECK(removed.empty());
}

TEST_CASE("split schedules are rejected") {
  const Bundle b = fan();
  Schedule s = make_schedule(b.graph, fan_map());
  s.assignment[T("c1")] = {{N("n2"), 0.5}, {N("n4"), 0.5}};
  CHECK_THROWS_AS(iterate_dup(s, b.cluster, b.exec, 3), ModelError);
}

TEST_CASE("repeated duplication along a chain composes") {
  // Both chain links are slow; each round removes one crossing.
  Bundle b = four_nodes({{"E", "S", 1'000'000}, {"S", "M", 1'000'000}, {"M", "X", 1'000'000}}, "E", "X");
  b.cluster.add_node(N("n5"));
  for (const auto& n : b.cluster.nodes())
    if (n != N("n5")) {
      b.cluster.set_link(n, N("n5"), LinkProfile{0.0, 1e-6, 0.0, std::nullopt, std::nullopt});
      b.cluster.set_link(N("n5"), n, LinkProfile{0.0, 1e-6, 0.0, std::nullopt, std::nullopt});
    }
  for (const auto& t : b.graph.tasks()) b.exec.set(t, N("n5"), 1.0);
  b.cluster.set_link(N("n3"), N("n2"), LinkProfile{0.0, 1e-5, 0.0, std::nullopt, std::nullopt});
  b.exec.set(T("S"), N("n4"), 1.0);
  const Schedule s =
      make_schedule(b.graph, {{T("E"), N("n1")}, {T("S"), N("n2")}, {T("M"), N("n3")}, {T("X"), N("n2")}});
  const auto res = iterate_dup(s, b.cluster, b.exec, 5);
  CHECK(res.rounds.size() >= 2);
  const TaskGraph& g = res.schedule.graph;
  CHECK(g.topological_order().has_value());
  CHECK(fully_connected(g));
  for (const auto& [dup, origin] : g.origins()) CHECK(b.graph.contains(origin));
  double prev = max_schedule_time(resource_times(s, b.cluster, b.exec));
  for (const auto& r : res.rounds) {
    CHECK(r.max_after <= r.max_before);
    CHECK(r.max_before <= prev);
    prev = r.max_after;
  }
}

TEST_CASE("property: duplication keeps graphs valid and never raises the max") {
  std::size_t exercised = 0;
  for (std::uint64_t seed = 1; seed <= 120; ++seed) {
    Bundle b = random_bundle(seed, 8, 7, 5);
    const Schedule s = random_schedule(b, seed);
    for (const auto& [r, v] : resource_times(s, b.cluster, b.exec))
      if (r.is_link()) {
        b.cluster = inflate_link(b.cluster, r.src, r.dst, 8.0);
        break;
      }
    const auto res = iterate_dup(s, b.cluster, b.exec, 4);
    exercised += !res.rounds.empty();
    const TaskGraph& g = res.schedule.graph;
    CHECK(g.topological_order().has_value());
    CHECK(fully_connected(g));
    CHECK(validate_schedule(res.schedule, b.cluster).ok());
    CHECK(res.rounds.size() <= 4);
    CHECK(max_schedule_time(resource_times(res.schedule, b.cluster, b.exec)) <=
          max_schedule_time(resource_times(s, b.cluster, b.exec)) * (1 + 1e-12));
    CHECK(validate(g, b.cluster, b.exec).ok());
  }
  CHECK(exercised >= 5);
}
