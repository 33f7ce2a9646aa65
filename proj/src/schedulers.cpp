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

#include "tpsched/schedulers.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "tpsched/analysis.hpp"

namespace tpsched {

namespace {

struct Slot {
  double start;
  double finish;
};

/// Earliest start >= ready that leaves room for `duration` between busy slots.
double earliest_gap(const std::vector<Slot>& busy, double ready, double duration) {
  double start = ready;
  for (const auto& s : busy) {
    if (start + duration <= s.start) return start;
    start = std::max(start, s.finish);
  }
  return start;
}

}  // namespace

Schedule heft_schedule(const TaskGraph& graph, const Cluster& cluster, const ExecutionMatrix& exec) {
  require_ok(validate(graph, cluster, exec));
  const CostModel costs(graph, cluster, exec);
  const auto order = rank_order(graph, upward_rank(graph, cluster, exec));

  std::map<NodeId, std::vector<Slot>> busy;
  std::map<TaskId, std::pair<NodeId, double>> placed;  // node, finish time
  std::map<TaskId, NodeId> mapping;

  for (const auto& task : order) {
    const NodeId* best_node = nullptr;
    double best_start = 0.0, best_finish = std::numeric_limits<double>::infinity();
    for (const auto& node : cluster.nodes()) {
      double ready = 0.0;
      for (const auto& p : graph.parents(task)) {
        const auto& [pnode, pfinish] = placed.at(p);
        ready = std::max(ready, pfinish + costs.transfer(p, task, pnode, node));
      }
      const double d = costs.exec(task, node);
      const double start = earliest_gap(busy[node], ready, d);
      if (start + d < best_finish) {
        best_finish = start + d;
        best_start = start;
        best_node = &node;
      }
    }
    auto& slots = busy[*best_node];
    slots.insert(std::upper_bound(slots.begin(), slots.end(), best_start,
                                  [](double v, const Slot& s) { return v < s.start; }),
                 Slot{best_start, best_finish});
    placed[task] = {*best_node, best_finish};
    mapping[task] = *best_node;
  }
  return make_schedule(graph, mapping);
}

Schedule tpheft_schedule(const TaskGraph& graph, const Cluster& cluster, const ExecutionMatrix& exec,
                         std::vector<TpheftStep>* trace) {
  require_ok(validate(graph, cluster, exec));
  const CostModel costs(graph, cluster, exec);
  const auto order = rank_order(graph, upward_rank(graph, cluster, exec));

  ResourceTimes res;
  for (const auto& n : cluster.nodes()) res[Resource::node(n)] = 0.0;
  std::map<TaskId, NodeId> mapping;

  auto place = [&](const TaskId& task, const NodeId& node) {
    res[Resource::node(node)] += costs.exec(task, node);
    for (const auto& p : graph.parents(task)) {
      const auto& pnode = mapping.at(p);
      if (pnode != node) res[Resource::link(pnode, node)] += costs.transfer(p, task, pnode, node);
    }
    mapping[task] = node;
  };

  {
    const TaskId& entry = graph.entry();
    TpheftStep step{entry, {}, {}};
    const NodeId* best = nullptr;
    for (const auto& n : cluster.nodes()) {
      step.candidate_cost[n] = costs.exec(entry, n);
      if (!best || step.candidate_cost[n] < step.candidate_cost[*best]) best = &n;
    }
    step.chosen = *best;
    place(entry, *best);
    if (trace) trace->push_back(std::move(step));
  }

  for (const auto& task : order) {
    if (task == graph.entry()) continue;
    TpheftStep step{task, {}, {}};
    const NodeId* best = nullptr;
    for (const auto& proc : cluster.nodes()) {
      double worst = res[Resource::node(proc)] + costs.exec(task, proc);
      std::map<Resource, double> touched;
      for (const auto& p : graph.parents(task)) {
        const auto& pnode = mapping.at(p);
        if (pnode == proc) continue;
        touched[Resource::link(pnode, proc)] += costs.transfer(p, task, pnode, proc);
      }
      for (const auto& [link, extra] : touched) {
        auto it = res.find(link);
        worst = std::max(worst, (it == res.end() ? 0.0 : it->second) + extra);
      }
      step.candidate_cost[proc] = worst;
      if (!best || worst < step.candidate_cost[*best]) best = &proc;
    }
    step.chosen = *best;
    place(task, *best);
    if (trace) trace->push_back(std::move(step));
  }
  return make_schedule(graph, mapping);
}

Schedule manual_schedule(const TaskGraph& graph, const Cluster& cluster,
                         const std::map<TaskId, std::vector<Placement>>& assignment) {
  Schedule s;
  s.graph = graph;
  s.assignment = assignment;
  require_ok(validate_schedule(s, cluster));
  return s;
}

Schedule one_task_per_node_schedule(const TaskGraph& graph, const Cluster& cluster) {
  if (cluster.size() < graph.size())
    throw ModelError(fmt::format("need {} nodes for one task per node, cluster has {}", graph.size(), cluster.size()));
  auto order = graph.topological_order();
  if (!order) throw ModelError("graph has a cycle");
  std::map<TaskId, NodeId> mapping;
  auto node = cluster.nodes().begin();
  for (const auto& t : *order) mapping[t] = *node++;
  return make_schedule(graph, mapping);
}

}  // namespace tpsched
