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

#include "tpsched/generate.hpp"

#include <random>

#include <fmt/format.h>

#include "tpsched/routing.hpp"

namespace tpsched {

namespace {

TaskId task(std::size_t i) { return TaskId{"T" + std::to_string(i)}; }

class Draw {
 public:
  explicit Draw(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream)};
    rng_.seed(seq);
  }
  double unit() { return unit_draw(rng_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  Bytes bytes(Bytes lo, Bytes hi) { return lo + Bytes(unit() * double(hi - lo + 1)); }
  std::size_t index(std::size_t n) { return std::min(n - 1, std::size_t(unit() * double(n))); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

DagShape parse_shape(const std::string& name) {
  if (name == "diamond") return DagShape::diamond;
  if (name == "linear") return DagShape::linear;
  if (name == "fork-join" || name == "fork_join") return DagShape::fork_join;
  if (name == "layered-random" || name == "layered_random") return DagShape::layered_random;
  throw ModelError(fmt::format("unknown DAG shape '{}' (diamond, linear, fork-join, layered-random)", name));
}

const char* to_string(DagShape shape) {
  switch (shape) {
    case DagShape::diamond: return "diamond";
    case DagShape::linear: return "linear";
    case DagShape::fork_join: return "fork-join";
    case DagShape::layered_random: return "layered-random";
  }
  return "unknown";
}

TaskGraph generate_graph(const GenParams& p) {
  Draw draw(p.seed, 1);
  TaskGraph g;
  auto edge = [&](std::size_t a, std::size_t b) { g.add_edge(task(a), task(b), draw.bytes(p.file_min, p.file_max)); };
  std::size_t n = 0;
  switch (p.shape) {
    case DagShape::diamond:
      n = 4;
      for (std::size_t i = 0; i < n; ++i) g.add_task(task(i));
      edge(0, 1);
      edge(0, 2);
      edge(1, 3);
      edge(2, 3);
      break;
    case DagShape::linear:
      if (p.length < 1) throw ModelError("linear DAG needs length >= 1");
      n = p.length;
      for (std::size_t i = 0; i < n; ++i) g.add_task(task(i));
      for (std::size_t i = 0; i + 1 < n; ++i) edge(i, i + 1);
      break;
    case DagShape::fork_join:
      if (p.width < 1) throw ModelError("fork-join DAG needs width >= 1");
      n = p.width + 2;
      for (std::size_t i = 0; i < n; ++i) g.add_task(task(i));
      for (std::size_t i = 1; i <= p.width; ++i) edge(0, i);
      for (std::size_t i = 1; i <= p.width; ++i) edge(i, n - 1);
      break;
    case DagShape::layered_random: {
      if (p.width < 1 || p.layers < 1) throw ModelError("layered-random DAG needs width >= 1 and layers >= 1");
      std::vector<std::vector<std::size_t>> layers{{0}};
      n = 1;
      for (std::size_t l = 0; l < p.layers; ++l) {
        const std::size_t k = 1 + draw.index(p.width);
        layers.emplace_back();
        for (std::size_t i = 0; i < k; ++i) layers.back().push_back(n++);
      }
      layers.push_back({n++});
      for (std::size_t i = 0; i < n; ++i) g.add_task(task(i));
      for (std::size_t l = 1; l < layers.size(); ++l) {
        const auto& prev = layers[l - 1];
        for (std::size_t t : layers[l]) {
          const std::size_t first = prev[draw.index(prev.size())];
          edge(first, t);
          for (std::size_t s : prev)
            if (s != first && draw.unit() < p.edge_probability) edge(s, t);
        }
        // Every task of the previous layer needs a child.
        for (std::size_t s : prev)
          if (g.children(task(s)).empty()) edge(s, layers[l][draw.index(layers[l].size())]);
      }
      break;
    }
  }
  g.set_entry(task(0));
  g.set_exit(task(n - 1));
  return g;
}

Bundle generate(const GenParams& p) {
  if (p.nodes < 1) throw ModelError("need at least one node");
  if (!(p.exec_min > 0.0) || p.exec_max < p.exec_min) throw ModelError("need 0 < exec_min <= exec_max");
  if (p.file_max < p.file_min) throw ModelError("need file_min <= file_max");
  if (!(p.compute_scale > 0.0) || !(p.comm_scale >= 0.0)) throw ModelError("scale factors must be positive");

  Bundle b;
  b.graph = generate_graph(p);
  Draw exec_draw(p.seed, 2);
  Draw link_draw(p.seed, 3);
  std::vector<NodeId> nodes;
  for (std::size_t i = 1; i <= p.nodes; ++i) {
    nodes.push_back(NodeId{"n" + std::to_string(i)});
    b.cluster.add_node(nodes.back());
  }
  for (const auto& s : nodes)
    for (const auto& d : nodes)
      if (s != d) {
        const double k = p.comm_scale * (1.0 + p.link_heterogeneity * link_draw.unit());
        b.cluster.set_link(s, d, scaled(p.link, k));
      }
  for (const auto& t : b.graph.tasks()) {
    const Seconds base = exec_draw.uniform(p.exec_min, p.exec_max);
    for (const auto& n : nodes)
      b.exec.set(t, n, p.compute_scale * base * (1.0 + p.node_heterogeneity * exec_draw.unit()));
  }
  return b;
}

Cluster inflate_link(const Cluster& cluster, const NodeId& src, const NodeId& dst, double factor, bool both_ways) {
  Cluster out = cluster;
  out.set_link(src, dst, scaled(cluster.link(src, dst), factor));
  if (both_ways) out.set_link(dst, src, scaled(cluster.link(dst, src), factor));
  return out;
}

}  // namespace tpsched
