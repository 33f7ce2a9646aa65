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

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <tuple>

#include "sim_internal.hpp"

namespace tpsched::detail {

namespace {

using InstanceQueue = std::priority_queue<std::uint64_t, std::vector<std::uint64_t>, std::greater<>>;

/// Transfers waiting on a link lane: (instance, receiving replica).
using TransferQueue = std::priority_queue<std::pair<std::uint64_t, std::size_t>,
                                          std::vector<std::pair<std::uint64_t, std::size_t>>, std::greater<>>;

/// Node lane: one (task, replica). Link lane: one (link, parent, child).
using NodeLane = std::pair<std::size_t, std::size_t>;
using LinkLane = std::tuple<std::size_t, std::size_t, std::size_t>;

}  // namespace

SimResult simulate_lockstep(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec,
                            const SimConfig& config) {
  SimModel m = compile(schedule, cluster, exec);
  Recorder rec(m, config);

  std::map<NodeLane, InstanceQueue> node_lanes;
  std::map<LinkLane, TransferQueue> link_lanes;
  std::map<std::tuple<std::uint64_t, std::size_t, std::size_t>, std::size_t> buckets;

  auto deliver = [&](std::uint64_t instance, std::size_t parent, std::size_t child, std::size_t replica, Seconds t) {
    rec.audit_delivery(instance, child, replica);
    rec.event(t, m.tasks[child].replica_node[replica], SimEventKind::deliver, instance, parent, child, replica);
    auto key = std::make_tuple(instance, child, replica);
    if (++buckets[key] == m.tasks[child].parent_count) {
      buckets.erase(key);
      node_lanes[{child, replica}].push(instance);
    }
  };
  std::uint64_t next_arrival = 0;
  auto inject_until = [&](Seconds t) {
    while (next_arrival < config.num_instances &&
           (config.input_interarrival <= 0.0 || double(next_arrival) * config.input_interarrival <= t)) {
      rec.injected();
      for (std::size_t s : m.sources) node_lanes[{s, rec.route(next_arrival, s)}].push(next_arrival);
      ++next_arrival;
    }
  };

  struct Job {
    std::uint64_t instance;
    std::size_t resource;
    bool is_exec;
    std::size_t task, child, replica;
    Seconds start, end;
  };

  Seconds now = 0.0;
  inject_until(now);
  while (true) {
    std::vector<Job> jobs;
    std::map<std::size_t, Seconds> load;
    for (auto& [lane, q] : node_lanes) {
      if (q.empty()) continue;
      const auto [task, replica] = lane;
      const std::size_t node = m.tasks[task].replica_node[replica];
      const Seconds d = rec.jittered(m.tasks[task].replica_exec[replica]);
      Seconds& busy = load[node];
      jobs.push_back({q.top(), node, true, task, task, replica, now + busy, now + busy + d});
      busy += d;
      q.pop();
    }
    for (auto& [lane, q] : link_lanes) {
      if (q.empty()) continue;
      const auto [link, parent, child] = lane;
      const auto [instance, replica] = q.top();
      const auto& cs = m.tasks[parent].children;
      const Bytes size = std::find_if(cs.begin(), cs.end(), [&](const auto& c) { return c.first == child; })->second;
      const Seconds d = rec.jittered(cluster.transfer_time(m.resources[link].src, m.resources[link].dst, size));
      Seconds& busy = load[link];
      jobs.push_back({instance, link, false, parent, child, replica, now + busy, now + busy + d});
      busy += d;
      q.pop();
    }
    if (jobs.empty()) {
      if (next_arrival >= config.num_instances) break;
      now = std::max(now, double(next_arrival) * config.input_interarrival);
      inject_until(now);
      continue;
    }

    Seconds stage = 0.0;
    for (const auto& [r, t] : load) stage = std::max(stage, t);
    const Seconds end = now + stage;
    for (const auto& j : jobs) {
      rec.busy(j.resource, j.start, j.end);
      if (j.is_exec) {
        rec.event(j.start, j.resource, SimEventKind::exec_start, j.instance, j.task, j.task, j.replica);
        rec.event(j.end, j.resource, SimEventKind::exec_end, j.instance, j.task, j.task, j.replica);
      } else {
        rec.event(j.start, j.resource, SimEventKind::transfer_start, j.instance, j.task, j.child, j.replica);
        rec.event(j.end, j.resource, SimEventKind::transfer_end, j.instance, j.task, j.child, j.replica);
      }
    }

    // Outputs become visible at the stage boundary.
    for (const auto& j : jobs) {
      if (!j.is_exec) {
        deliver(j.instance, j.task, j.child, j.replica, end);
        continue;
      }
      const auto& task = m.tasks[j.task];
      rec.executed(j.task, j.replica);
      if (task.is_exit) {
        rec.completed(j.instance, end);
        rec.event(end, j.resource, SimEventKind::complete, j.instance, j.task, j.task, j.replica);
      }
      const std::size_t from = task.replica_node[j.replica];
      for (const auto& [child, size] : task.children) {
        const std::size_t rep = rec.route(j.instance, child);
        const std::size_t to = m.tasks[child].replica_node[rep];
        if (to == from) {
          deliver(j.instance, j.task, child, rep, end);
          continue;
        }
        link_lanes[{m.link(from, to), j.task, child}].emplace(j.instance, rep);
      }
    }
    now = end;
    inject_until(now);
  }
  return rec.finish();
}

}  // namespace tpsched::detail
