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

#include "tpsched/dup.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "tpsched/split.hpp"

namespace tpsched {

namespace {

Seconds time_of(const ResourceTimes& times, const Resource& r) {
  auto it = times.find(r);
  return it == times.end() ? 0.0 : it->second;
}

TaskId duplicate_name(const TaskGraph& graph, const TaskId& task) {
  const std::string base = graph.origin(task).str() + "-dup";
  TaskId name{base};
  for (int k = 2; graph.contains(name); ++k) name = TaskId{base + std::to_string(k)};
  return name;
}

constexpr double kSlack = 1e-12;

}  // namespace

std::optional<DupChoice> find_best_dup_node(const ResourceTimes& times, const Schedule& schedule,
                                            const Cluster& cluster, const ExecutionMatrix& exec,
                                            const std::set<NodeId>& candidates) {
  if (!schedule.is_unsplit()) throw ModelError("duplication requires an unsplit schedule");
  const auto [btnk, btnk_time] = bottleneck(times);
  if (!btnk.is_link()) return std::nullopt;

  const auto& graph = schedule.graph;
  const CostModel costs(graph, cluster, exec);
  DupChoice choice;
  choice.link = btnk;
  choice.bottleneck_time = btnk_time;
  for (const auto& [task, share] : schedule.tasks_on(btnk.src)) {
    std::vector<TaskId> on_dst;
    for (const auto& c : graph.children(task))
      if (schedule.node_of(c) == btnk.dst) on_dst.push_back(c);
    if (on_dst.empty()) continue;
    choice.src_tasks.push_back(task);
    choice.rerouted_children[task] = std::move(on_dst);
  }
  if (choice.src_tasks.empty()) return std::nullopt;

  std::optional<NodeId> best;
  Seconds best_cost = 0.0;
  for (const auto& proc : candidates) {
    if (proc == btnk.src || proc == btnk.dst) continue;
    Seconds node_time = time_of(times, Resource::node(proc));
    std::map<Resource, Seconds> extra;
    for (const auto& task : choice.src_tasks) {
      node_time += costs.exec(task, proc);
      for (const auto& parent : graph.parents(task)) {
        const auto& pnode = schedule.node_of(parent);
        if (pnode == proc) continue;
        extra[Resource::link(pnode, proc)] += costs.transfer(parent, task, pnode, proc);
      }
      for (const auto& child : choice.rerouted_children.at(task))
        extra[Resource::link(proc, btnk.dst)] += costs.transfer(task, child, proc, btnk.dst);
    }
    Seconds cost = node_time;
    for (const auto& [link, add] : extra) cost = std::max(cost, time_of(times, link) + add);
    if (!best || cost < best_cost) {
      best = proc;
      best_cost = cost;
    }
  }
  if (!best || best_cost >= btnk_time) return std::nullopt;
  choice.target = *best;
  choice.predicted_cost = best_cost;
  return choice;
}

Schedule apply_duplication(const Schedule& schedule, const DupChoice& choice) {
  Schedule out = schedule;
  auto& graph = out.graph;
  for (const auto& task : choice.src_tasks) {
    const TaskId dup = duplicate_name(graph, task);
    graph.add_task(dup);
    graph.set_origin(dup, task);
    for (const auto& parent : schedule.graph.parents(task))
      graph.add_edge(parent, dup, *schedule.graph.file_size(parent, task));
    for (const auto& child : choice.rerouted_children.at(task)) {
      const Bytes size = *schedule.graph.file_size(task, child);
      graph.remove_edge(task, child);
      graph.add_edge(dup, child, size);
    }
    out.assignment[dup] = {Placement{choice.target, 1.0}};
  }
  return out;
}

Schedule garbage_collect_zombies(const Schedule& schedule, std::vector<TaskId>* removed) {
  Schedule out = schedule;
  auto& graph = out.graph;
  if (!graph.contains(graph.exit())) throw ModelError("exit task is missing");
  const auto live = graph.ancestors_of(graph.exit());
  const TaskId entry_origin = graph.origin(graph.entry());

  std::vector<TaskId> dead;
  for (const auto& t : graph.tasks())
    if (!live.contains(t)) dead.push_back(t);
  for (const auto& t : dead) {
    graph.remove_task(t);
    out.assignment.erase(t);
  }
  if (removed) *removed = dead;

  if (!graph.contains(graph.entry())) {
    std::optional<TaskId> replacement;
    for (const auto& s : graph.sources())
      if (graph.origin(s) == entry_origin) {
        replacement = s;
        break;
      }
    if (!replacement) throw ModelError("garbage collection removed the entry task and every copy of it");
    graph.set_entry(*replacement);
  }

  std::vector<TaskId> roots;
  for (const auto& s : graph.sources())
    if (graph.origin(s) == entry_origin) roots.push_back(s);
  const auto reached = graph.descendants_of(roots);
  if (!reached.contains(graph.exit())) throw ModelError("exit task is unreachable from the entry after rewriting");
  return out;
}

DupResult iterate_dup(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec,
                      std::size_t max_rounds) {
  DupResult result{schedule, {}, "max rounds reached"};
  if (!schedule.is_unsplit()) throw ModelError("duplication requires an unsplit schedule");
  while (true) {
    if (result.rounds.size() >= max_rounds) {
      result.stop_reason = "max rounds reached";
      break;
    }
    const auto times = resource_times(result.schedule, cluster, exec);
    const auto [btnk, before] = bottleneck(times);
    if (!btnk.is_link()) {
      result.stop_reason = fmt::format("bottleneck {} is a node; duplication cannot help", btnk.name());
      break;
    }
    const auto candidates = idle_nodes(times, cluster);
    if (candidates.empty()) {
      result.stop_reason = "no idle nodes";
      break;
    }
    auto choice = find_best_dup_node(times, result.schedule, cluster, exec, candidates);
    if (!choice) {
      result.stop_reason = fmt::format("no candidate beats bottleneck {} ({:.6g} s)", btnk.name(), before);
      break;
    }
    DupRound round{*choice, before, 0.0, {}};
    Schedule next = garbage_collect_zombies(apply_duplication(result.schedule, *choice), &round.collected);
    if (!next.graph.topological_order()) throw ModelError("duplication produced a cycle");
    round.max_after = max_schedule_time(resource_times(next, cluster, exec));
    if (round.max_after > before * (1.0 + kSlack)) {
      result.stop_reason = "duplication would raise the max schedule time";
      break;
    }
    result.rounds.push_back(std::move(round));
    result.schedule = std::move(next);
  }
  return result;
}

}  // namespace tpsched
