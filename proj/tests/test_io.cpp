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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "tpsched/dup.hpp"
#include "tpsched/io.hpp"

using namespace tpsched;
using namespace fixtures;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tpsched_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("graph round trip") {
  const Bundle b = ref_bundle();
  const TaskGraph back = graph_from_json(to_json(b.graph));
  CHECK(back == b.graph);
}

TEST_CASE("graph round trip keeps duplicate origins") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Bundle b = random_bundle(seed);
    const Schedule s = random_schedule(b, seed);
    for (const auto& [r, v] : resource_times(s, b.cluster, b.exec))
      if (r.is_link()) {
        b.cluster = inflate_link(b.cluster, r.src, r.dst, 10.0);
        break;
      }
    const auto res = iterate_dup(s, b.cluster, b.exec, 3);
    const TaskGraph& g = res.schedule.graph;
    CHECK(graph_from_json(to_json(g)) == g);
    CHECK(graph_from_json(Json::parse(to_json(g).dump())) == g);
  }
}

TEST_CASE("cluster and matrix round trip") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Bundle b = random_bundle(seed);
    LinkProfile p = b.cluster.links().begin()->second;
    p.min_size = 10;
    p.max_size = 5000;
    const auto [src, dst] = b.cluster.links().begin()->first;
    b.cluster.set_link(src, dst, p);
    CHECK(cluster_from_json(Json::parse(to_json(b.cluster).dump())) == b.cluster);
    CHECK(matrix_from_json(Json::parse(to_json(b.exec).dump())) == b.exec);
  }
}

TEST_CASE("schedule round trip through files preserves the prediction") {
  const auto dir = temp_dir("sched");
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Bundle b = random_bundle(seed);
    Schedule s = random_schedule(b, seed);
    s.assignment.begin()->second = {{*b.cluster.nodes().begin(), 0.25}, {*b.cluster.nodes().rbegin(), 0.75}};
    write_json(dir / "s.json", to_json(s.assignment));
    Schedule back;
    back.graph = b.graph;
    back.assignment = assignment_from_json(read_json(dir / "s.json"));
    CHECK(back == s);
    CHECK(resource_times(back, b.cluster, b.exec) == resource_times(s, b.cluster, b.exec));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("shorthand and bidirectional forms") {
  const Json map = Json::parse(R"({"T0": "n1", "T1": [{"n2": 0.5}, {"n3": 0.5}]})");
  const auto a = assignment_from_json(map);
  CHECK(a.at(T("T0")) == std::vector<Placement>{{N("n1"), 1.0}});
  CHECK(a.at(T("T1")).size() == 2);
  CHECK(a.at(T("T1"))[1] == Placement{N("n3"), 0.5});

  const Json cl = Json::parse(
      R"({"nodes": ["a", "b"], "links": [{"src": "a", "dst": "b", "a": 0, "b": 2e-6, "c": 0.5, "bidirectional": true}]})");
  const Cluster c = cluster_from_json(cl);
  CHECK(c.link(N("b"), N("a")) == c.link(N("a"), N("b")));
  CHECK(c.transfer_time(N("b"), N("a"), 1'000'000) == doctest::Approx(2.5));

  const Json diamond = read_json(TPSCHED_DATA "/diamond/map.json");
  Schedule s;
  s.graph = ref_bundle().graph;
  s.assignment = assignment_from_json(diamond);
  CHECK(s == ref_schedule(ref_bundle()));
}

TEST_CASE("example bundle matches the fixture") {
  const Bundle b = ref_bundle();
  CHECK(graph_from_json(read_json(TPSCHED_DATA "/diamond/dag.json")) == b.graph);
  CHECK(cluster_from_json(read_json(TPSCHED_DATA "/diamond/cluster.json")) == b.cluster);
  CHECK(matrix_from_json(read_json(TPSCHED_DATA "/diamond/matrix.json")) == b.exec);
}

TEST_CASE("malformed json is a format error") {
  for (const char* text : {
           R"({"edges": [], "entry": "A", "exit": "A"})",
           R"({"tasks": "A", "edges": [], "entry": "A", "exit": "A"})",
           R"({"tasks": ["A", "B"], "edges": [{"from": "A", "to": "B", "bytes": -1}], "entry": "A", "exit": "B"})",
           R"({"tasks": ["A", "B"], "edges": [{"from": "A", "to": "B", "bytes": 1.5}], "entry": "A", "exit": "B"})",
           R"({"tasks": ["A", 3], "edges": [], "entry": "A", "exit": "A"})",
       })
    CHECK_THROWS_AS(graph_from_json(Json::parse(text)), FormatError);
  CHECK_THROWS_AS(cluster_from_json(Json::parse(R"({"nodes": ["a"], "links": [{"src": "a", "dst": "b"}]})")),
                  FormatError);
  CHECK_THROWS_AS(cluster_from_json(Json::parse(
                      R"({"nodes": ["a"], "links": [{"src": "a", "dst": "b", "a": 0, "b": "x", "c": 0}]})")),
                  FormatError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse(R"({"exec": {"T": {"n": "slow"}}})")), FormatError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse(R"({"T": {"n": 1}})")), FormatError);
  CHECK_THROWS_AS(assignment_from_json(Json::parse(R"({"T": [{"n": 0.5, "m": 0.5}]})")), FormatError);
  CHECK_THROWS_AS(assignment_from_json(Json::parse(R"({"T": 3})")), FormatError);

  const auto dir = temp_dir("bad");
  std::ofstream(dir / "broken.json") << "{\"tasks\": [";
  CHECK_THROWS_AS(read_json(dir / "broken.json"), FormatError);
  CHECK_THROWS_AS(read_json(dir / "missing.json"), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("sample csv readers") {
  std::istringstream ok("size_bytes,time_s\n# warm cache\n1000,0.5\n\n2000,0.9\n");
  const auto t = read_transfer_samples(ok);
  REQUIRE(t.size() == 2);
  CHECK(t[1].size == 2000);
  CHECK(t[1].time == doctest::Approx(0.9));

  std::istringstream ex("task,node,time_s\nT0,n1,3\nT1,n2,2.5\n");
  const auto e = read_exec_samples(ex);
  REQUIRE(e.size() == 2);
  CHECK(e[1].task == T("T1"));
  CHECK(e[1].node == N("n2"));

  for (const char* bad : {"bytes,time\n1,2\n", "size_bytes,time_s\n1\n", "size_bytes,time_s\nabc,1\n",
                          "size_bytes,time_s\n1,2,3\n", "size_bytes,time_s\n-5,1\n", ""}) {
    std::istringstream in(bad);
    CHECK_THROWS_AS(read_transfer_samples(in), FormatError);
  }
  std::istringstream bad_exec("task,node,time_s\nT0,n1,fast\n");
  CHECK_THROWS_AS(read_exec_samples(bad_exec), FormatError);
}

TEST_CASE("report text") {
  const Bundle b = ref_bundle();
  const auto times = resource_times(ref_schedule(b), b.cluster, b.exec);
  const std::string text = format_analysis(times);
  CHECK(text.find("n3") != std::string::npos);
  CHECK(text.find("bottleneck") != std::string::npos);
  CHECK(text.find("200") != std::string::npos);
  CHECK(per_kilosecond(0.2) == doctest::Approx(200.0));
}
