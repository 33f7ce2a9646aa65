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

#include "tpsched/split.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace tpsched {

namespace {

Seconds time_of(const ResourceTimes& times, const Resource& r) {
  auto it = times.find(r);
  return it == times.end() ? 0.0 : it->second;
}

// Relative slack for "did not get worse" comparisons of recomputed sums.
constexpr double kSlack = 1e-12;

}  // namespace

std::set<NodeId> idle_nodes(const ResourceTimes& times, const Cluster& cluster, Seconds threshold) {
  std::set<NodeId> out;
  for (const auto& n : cluster.nodes())
    if (time_of(times, Resource::node(n)) <= threshold) out.insert(n);
  return out;
}

std::optional<SplitDecision> best_split_of(const NodeId& source, Seconds relieved_time, const ResourceTimes& times,
                                           const Schedule& schedule, const Cluster& cluster,
                                           const ExecutionMatrix& exec, const std::set<NodeId>& candidates) {
  const CostModel costs(schedule.graph, cluster, exec);
  const auto moving = schedule.tasks_on(source);
  if (moving.empty() || !(relieved_time > 0.0)) return std::nullopt;

  std::optional<SplitDecision> best;
  for (const auto& proc : candidates) {
    if (proc == source) continue;
    // Tentatively move 100% of the source's workload onto proc. Replicas that
    // sit on the source move with it, so edges between them stay local.
    auto where = [&](const NodeId& n) -> const NodeId& { return n == source ? proc : n; };
    Seconds node_time = time_of(times, Resource::node(proc));
    std::map<Resource, Seconds> extra;
    for (const auto& [task, share] : moving) {
      node_time += share * costs.exec(task, proc);
      for (const auto& parent : schedule.graph.parents(task)) {
        for (const auto& rep : schedule.placements(parent)) {
          const NodeId& from = where(rep.node);
          if (from == proc) continue;
          extra[Resource::link(from, proc)] += rep.portion * share * costs.transfer(parent, task, from, proc);
        }
      }
      for (const auto& child : schedule.graph.children(task)) {
        for (const auto& rep : schedule.placements(child)) {
          const NodeId& to = where(rep.node);
          if (to == proc) continue;
          extra[Resource::link(proc, to)] += share * rep.portion * costs.transfer(task, child, proc, to);
        }
      }
    }
    Seconds cost = node_time;
    for (const auto& [link, add] : extra) cost = std::max(cost, time_of(times, link) + add);

    if (!best || cost < best->target_cost) {
      SplitDecision d;
      d.source_node = source;
      d.target_node = proc;
      d.bottleneck_time = relieved_time;
      d.target_cost = cost;
      best = d;
    }
  }
  if (!best) return std::nullopt;
  // (1 - p) * bottleneck = p * cost
  best->portion = best->bottleneck_time / (best->bottleneck_time + best->target_cost);
  best->predicted_source_time = (1.0 - best->portion) * best->bottleneck_time;
  best->predicted_target_time = best->portion * best->target_cost;
  return best;
}

std::optional<SplitDecision> select_split(const ResourceTimes& times, const Schedule& schedule,
                                          const Cluster& cluster, const ExecutionMatrix& exec,
                                          const std::set<NodeId>& candidates) {
  if (candidates.empty()) return std::nullopt;
  const auto [btnk, btnk_time] = bottleneck(times);
  if (btnk.is_node()) return best_split_of(btnk.src, btnk_time, times, schedule, cluster, exec, candidates);

  auto via_src = best_split_of(btnk.src, btnk_time, times, schedule, cluster, exec, candidates);
  auto via_dst = best_split_of(btnk.dst, btnk_time, times, schedule, cluster, exec, candidates);
  if (!via_src || !via_dst) return via_src ? via_src : via_dst;
  auto outcome = [&](const SplitDecision& d) {
    return max_schedule_time(resource_times(apply_split(schedule, d), cluster, exec));
  };
  return outcome(*via_dst) < outcome(*via_src) ? via_dst : via_src;
}

Schedule apply_split(const Schedule& schedule, const SplitDecision& decision) {
  const double ptn = decision.portion;
  if (!(ptn > 0.0 && ptn < 1.0))
    throw ModelError(fmt::format("split portion {} is outside (0, 1)", ptn));
  if (decision.source_node == decision.target_node) throw ModelError("split source and target are the same node");

  Schedule out = schedule;
  for (auto& [task, list] : out.assignment) {
    auto src = std::find_if(list.begin(), list.end(), [&](const Placement& p) { return p.node == decision.source_node; });
    if (src == list.end()) continue;
    const double keep = src->portion * (1.0 - ptn);
    const double ship = src->portion * ptn;
    if (!(keep > 0.0) || !(ship > 0.0))
      throw ModelError(fmt::format("split of task {} leaves a zero portion", task.str()));
    src->portion = keep;
    auto dst = std::find_if(list.begin(), list.end(), [&](const Placement& p) { return p.node == decision.target_node; });
    if (dst == list.end())
      list.push_back(Placement{decision.target_node, ship});
    else
      dst->portion += ship;
  }
  return out;
}

SplitResult iterate_split(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec,
                          std::size_t max_rounds, const SplitOptions& options) {
  SplitResult result{schedule, {}};
  auto times = resource_times(result.schedule, cluster, exec);
  while (result.rounds.size() < max_rounds) {
    const auto candidates = idle_nodes(times, cluster, options.candidate_threshold);
    auto decision = select_split(times, result.schedule, cluster, exec, candidates);
    if (!decision) break;

    const auto [btnk, before] = bottleneck(times);
    Schedule next;
    try {
      next = apply_split(result.schedule, *decision);
    } catch (const ModelError&) {
      break;  // portion degenerated to 0 or 1
    }
    auto next_times = resource_times(next, cluster, exec);
    const Seconds after = max_schedule_time(next_times);
    // A split must relieve the bottleneck without pushing another resource
    // above the old max; otherwise further splitting is useless.
    if (!(time_of(next_times, btnk) < before) || after > before * (1.0 + kSlack)) break;

    result.rounds.push_back({*decision, btnk, before, after});
    result.schedule = std::move(next);
    times = std::move(next_times);
  }
  return result;
}

}  // namespace tpsched
