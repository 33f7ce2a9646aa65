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

// Shared inputs and independent oracles for the test suites.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tpsched/analysis.hpp"
#include "tpsched/generate.hpp"
#include "tpsched/model.hpp"
#include "tpsched/routing.hpp"
#include "tpsched/schedulers.hpp"

namespace fixtures {

using namespace tpsched;

inline TaskId T(const std::string& s) { return TaskId{s}; }
inline NodeId N(const std::string& s) { return NodeId{s}; }

/// Diamond on three nodes: exec 3, 2, 2, 5 s on the scheduled nodes (10 s
/// elsewhere), files of 2, 1, 3, 2 s over 1 s/MB links.
inline Bundle ref_bundle() {
  Bundle b;
  for (const char* t : {"T0", "T1", "T2", "T3"}) b.graph.add_task(T(t));
  b.graph.add_edge(T("T0"), T("T1"), 2'000'000);
  b.graph.add_edge(T("T0"), T("T2"), 1'000'000);
  b.graph.add_edge(T("T1"), T("T3"), 3'000'000);
  b.graph.add_edge(T("T2"), T("T3"), 2'000'000);
  b.graph.set_entry(T("T0"));
  b.graph.set_exit(T("T3"));
  const std::vector<NodeId> nodes{N("n1"), N("n2"), N("n3")};
  for (const auto& n : nodes) b.cluster.add_node(n);
  for (const auto& s : nodes)
    for (const auto& d : nodes)
      if (s != d) b.cluster.set_link(s, d, LinkProfile{0.0, 1e-6, 0.0, std::nullopt, std::nullopt});
  const std::map<std::string, std::pair<std::string, double>> own{
      {"T0", {"n1", 3.0}}, {"T1", {"n2", 2.0}}, {"T2", {"n2", 2.0}}, {"T3", {"n3", 5.0}}};
  for (const auto& [t, p] : own)
    for (const auto& n : nodes) b.exec.set(T(t), n, n.str() == p.first ? p.second : 10.0);
  return b;
}

inline std::map<TaskId, NodeId> ref_map() {
  return {{T("T0"), N("n1")}, {T("T1"), N("n2")}, {T("T2"), N("n2")}, {T("T3"), N("n3")}};
}

inline Schedule ref_schedule(const Bundle& b) { return make_schedule(b.graph, ref_map()); }

/// Heterogeneous random bundle with at most `max_tasks` tasks (>= 4) and
/// between 2 and `max_nodes` nodes.
inline Bundle random_bundle(std::uint64_t seed, std::size_t max_tasks = 8, std::size_t max_nodes = 5,
                            std::size_t min_nodes = 2) {
  std::mt19937_64 rng(seed * 7919 + 13);
  auto pick = [&](std::size_t lo, std::size_t hi) { return lo + std::size_t(rng() % (hi - lo + 1)); };
  GenParams p;
  p.shape = DagShape::layered_random;
  p.width = pick(1, 3);
  const std::size_t inner_max = std::max<std::size_t>(1, (max_tasks - 2) / p.width);
  p.layers = pick(1, std::min<std::size_t>(3, inner_max));
  p.edge_probability = 0.4;
  p.nodes = pick(min_nodes, max_nodes);
  p.exec_min = 1.0;
  p.exec_max = 10.0;
  p.node_heterogeneity = 1.0;
  p.file_min = 500'000;
  p.file_max = 6'000'000;
  p.link = LinkProfile{1e-14, 1e-6, 0.05, std::nullopt, std::nullopt};
  p.link_heterogeneity = 1.5;
  p.seed = seed;
  return generate(p);
}

/// Uniformly random unsplit placement.
inline Schedule random_schedule(const Bundle& b, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<NodeId> nodes(b.cluster.nodes().begin(), b.cluster.nodes().end());
  std::map<TaskId, NodeId> m;
  for (const auto& t : b.graph.tasks()) m[t] = nodes[rng() % nodes.size()];
  return make_schedule(b.graph, m);
}

/// Max schedule time computed straight from the definitions: per node the
/// portion-weighted execution times, per ordered node pair the flow-weighted
/// transfer times of every edge crossing it.
inline double oracle_max_time(const Schedule& s, const Cluster& cluster, const ExecutionMatrix& exec) {
  std::map<std::string, double> load;
  for (const auto& t : s.graph.tasks())
    for (const auto& p : s.assignment.at(t)) load["node:" + p.node.str()] += p.portion * exec.at(s.graph.origin(t), p.node);
  for (const auto& t : s.graph.tasks())
    for (const auto& c : s.graph.children(t)) {
      const Bytes size = *s.graph.file_size(t, c);
      for (const auto& a : s.assignment.at(t))
        for (const auto& d : s.assignment.at(c)) {
          if (a.node == d.node) continue;
          const auto& prof = cluster.link(a.node, d.node);
          const double x = double(size);
          load["link:" + a.node.str() + ">" + d.node.str()] += a.portion * d.portion * (prof.a * x * x + prof.b * x + prof.c);
        }
    }
  double best = 0.0;
  for (const auto& [k, v] : load) best = std::max(best, v);
  return best;
}

/// Every task can reach the exit and is reachable from an entry-origin source.
inline bool fully_connected(const TaskGraph& g) {
  const auto& order = g.topological_order();
  if (!order) return false;
  std::set<TaskId> fwd, bwd;
  for (const auto& t : *order) {
    const auto ps = g.parents(t);
    if ((ps.empty() && g.origin(t) == g.origin(g.entry())) ||
        std::any_of(ps.begin(), ps.end(), [&](const TaskId& p) { return fwd.contains(p); }))
      fwd.insert(t);
  }
  for (auto it = order->rbegin(); it != order->rend(); ++it) {
    const auto ch = g.children(*it);
    if (*it == g.exit() || std::any_of(ch.begin(), ch.end(), [&](const TaskId& c) { return bwd.contains(c); }))
      bwd.insert(*it);
  }
  return fwd.size() == g.size() && bwd.size() == g.size();
}

}  // namespace fixtures
