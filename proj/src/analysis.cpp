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

#include "tpsched/analysis.hpp"

#include <fmt/format.h>

namespace tpsched {

ResourceTimes resource_times(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec) {
  const CostModel costs(schedule.graph, cluster, exec);
  ResourceTimes times;
  for (const auto& n : cluster.nodes()) times[Resource::node(n)] = 0.0;

  for (const auto& [task, list] : schedule.assignment) {
    for (const auto& p : list) {
      if (!cluster.contains(p.node))
        throw ModelError(fmt::format("task {} placed on unknown node {}", task.str(), p.node.str()));
      times[Resource::node(p.node)] += p.portion * costs.exec(task, p.node);
    }
  }

  for (const auto& [edge, size] : schedule.graph.edges()) {
    const auto& from = schedule.placements(edge.first);
    const auto& to = schedule.placements(edge.second);
    for (const auto& pp : from) {
      for (const auto& pc : to) {
        if (pp.node == pc.node) continue;
        times[Resource::link(pp.node, pc.node)] += pp.portion * pc.portion * cluster.transfer_time(pp.node, pc.node, size);
      }
    }
  }
  return times;
}

std::pair<Resource, Seconds> bottleneck(const ResourceTimes& times) {
  if (times.empty()) throw ModelError("no resources to compare");
  // Map order already ranks nodes before links and ids ascending, so the
  // first strict maximum is the tie winner.
  auto best = times.begin();
  for (auto it = times.begin(); it != times.end(); ++it)
    if (it->second > best->second) best = it;
  return {best->first, best->second};
}

ThroughputEstimate predicted_throughput(const ResourceTimes& times) {
  auto [res, t] = bottleneck(times);
  if (!(t > 0.0)) throw ModelError("max schedule time is zero; nothing is scheduled");
  return {t, res, 1.0 / t};
}

}  // namespace tpsched
