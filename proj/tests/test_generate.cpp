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

using namespace tpsched;
using namespace fixtures;

TEST_CASE("shape names") {
  for (auto s : {DagShape::diamond, DagShape::linear, DagShape::fork_join, DagShape::layered_random})
    CHECK(parse_shape(to_string(s)) == s);
  CHECK_THROWS_AS(parse_shape("spiral"), ModelError);
}

TEST_CASE("diamond") {
  const Bundle b = generate(GenParams{});
  CHECK(b.graph.size() == 4);
  CHECK(b.graph.entry() == T("T0"));
  CHECK(b.graph.exit() == T("T3"));
  CHECK(b.graph.children(T("T0")).size() == 2);
  CHECK(b.graph.parents(T("T3")).size() == 2);
  CHECK(b.cluster.size() == 4);
  CHECK(b.cluster.links().size() == 12);
  CHECK(validate(b.graph, b.cluster, b.exec).ok());
}

TEST_CASE("linear is a chain") {
  GenParams p;
  p.shape = DagShape::linear;
  p.length = 7;
  const Bundle b = generate(p);
  CHECK(b.graph.size() == 7);
  CHECK(b.graph.edges().size() == 6);
  for (std::size_t i = 0; i + 1 < 7; ++i)
    CHECK(b.graph.children(T("T" + std::to_string(i))) == std::vector<TaskId>{T("T" + std::to_string(i + 1))});
}

TEST_CASE("fork join") {
  GenParams p;
  p.shape = DagShape::fork_join;
  p.width = 5;
  const Bundle b = generate(p);
  CHECK(b.graph.size() == 7);
  CHECK(b.graph.children(b.graph.entry()).size() == 5);
  CHECK(b.graph.parents(b.graph.exit()).size() == 5);
}

TEST_CASE("generated bundles are valid and reproducible") {
  for (auto shape : {DagShape::diamond, DagShape::linear, DagShape::fork_join, DagShape::layered_random})
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      GenParams p;
      p.shape = shape;
      p.seed = seed;
      p.nodes = 2 + seed % 5;
      p.node_heterogeneity = 0.5;
      p.link_heterogeneity = 0.5;
      p.edge_probability = 0.5;
      const Bundle a = generate(p), b = generate(p);
      CHECK(a.graph == b.graph);
      CHECK(a.cluster == b.cluster);
      CHECK(a.exec == b.exec);
      CHECK(validate(a.graph, a.cluster, a.exec).ok());
      CHECK(fully_connected(a.graph));
      CHECK(generate_graph(p) == a.graph);
      for (const auto& [e, size] : a.graph.edges()) {
        CHECK(size >= p.file_min);
        CHECK(size <= p.file_max);
      }
      for (const auto& [key, t] : a.exec.entries()) {
        CHECK(t >= p.exec_min);
        CHECK(t <= p.exec_max * 1.5);
      }
    }
}

TEST_CASE("seeds change random shapes") {
  GenParams p;
  p.shape = DagShape::layered_random;
  p.layers = 4;
  p.width = 4;
  std::set<std::size_t> edge_counts;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    p.seed = seed;
    edge_counts.insert(generate(p).graph.edges().size());
  }
  CHECK(edge_counts.size() > 1);
}

TEST_CASE("scale factors") {
  GenParams p;
  const Bundle base = generate(p);
  p.compute_scale = 3.0;
  p.comm_scale = 0.5;
  const Bundle s = generate(p);
  for (const auto& [key, t] : base.exec.entries()) CHECK(s.exec.at(key.first, key.second) == doctest::Approx(3 * t));
  for (const auto& [key, l] : base.cluster.links()) CHECK(s.cluster.link(key.first, key.second).b == doctest::Approx(0.5 * l.b));
}

TEST_CASE("link inflation") {
  const Bundle b = generate(GenParams{});
  const Cluster one = inflate_link(b.cluster, N("n1"), N("n2"), 10);
  CHECK(one.link(N("n1"), N("n2")).b == doctest::Approx(10 * b.cluster.link(N("n1"), N("n2")).b));
  CHECK(one.link(N("n2"), N("n1")) == b.cluster.link(N("n2"), N("n1")));
  const Cluster both = inflate_link(b.cluster, N("n1"), N("n2"), 10, true);
  CHECK(both.link(N("n2"), N("n1")).b == doctest::Approx(10 * b.cluster.link(N("n2"), N("n1")).b));
  CHECK_THROWS_AS(inflate_link(b.cluster, N("n1"), N("n9"), 10), ModelError);
}

TEST_CASE("invalid parameters") {
  GenParams p;
  p.nodes = 0;
  CHECK_THROWS_AS(generate(p), ModelError);
  p = {};
  p.exec_min = 5;
  p.exec_max = 1;
  CHECK_THROWS_AS(generate(p), ModelError);
  p = {};
  p.shape = DagShape::linear;
  p.length = 0;
  CHECK_THROWS_AS(generate(p), ModelError);
}
