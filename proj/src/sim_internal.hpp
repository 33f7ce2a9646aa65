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

// Shared machinery of the two simulation modes.

#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tpsched/simulator.hpp"

namespace tpsched::detail {

struct SimTask {
  TaskId id;
  std::vector<std::size_t> replica_node;  ///< node index per replica
  std::vector<Seconds> replica_exec;      ///< execution time per replica
  std::vector<Placement> replicas;
  std::vector<std::pair<std::size_t, Bytes>> children;  ///< (task index, file size)
  std::size_t parent_count = 0;
  RoutingMode mode = RoutingMode::probability;
  std::optional<ReplicaSelector> selector;
  bool is_exit = false;
};

/// Schedule flattened to indices. Task indices follow id order, so index
/// comparisons match lexicographic id comparisons.
struct SimModel {
  std::vector<NodeId> nodes;
  std::vector<SimTask> tasks;
  std::vector<std::size_t> sources;
  std::vector<Resource> resources;  ///< nodes first (index == node index), then links on demand
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> link_index;
  const Cluster* cluster = nullptr;

  std::size_t link(std::size_t src, std::size_t dst);
  Seconds transfer(std::size_t src, std::size_t dst, Bytes size) const {
    return cluster->transfer_time(nodes[src], nodes[dst], size);
  }
};

SimModel compile(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec);

/// Bookkeeping shared by both modes: busy intervals, events, completions,
/// routing audit and replica choices.
class Recorder {
 public:
  Recorder(SimModel& model, const SimConfig& config);

  /// Duration scaled by the configured jitter.
  Seconds jittered(Seconds d);

  /// Replica of `task` serving `instance`.
  std::size_t route(std::uint64_t instance, std::size_t task);
  /// Notes that a file of `instance` reached `replica` of `child`, counting
  /// the (instance, child) as misrouted if an earlier file went elsewhere.
  void audit_delivery(std::uint64_t instance, std::size_t child, std::size_t replica);

  void busy(std::size_t resource, Seconds start, Seconds end);
  void event(Seconds t, std::size_t resource, SimEventKind kind, std::uint64_t instance, std::size_t task,
             std::size_t peer, std::size_t replica);
  void executed(std::size_t task, std::size_t replica) { ++result_.replica_load[model_.tasks[task].id][replica]; }
  void completed(std::uint64_t instance, Seconds t);
  void injected() { ++result_.instances_injected; }

  /// Sorts completions, measures throughput and busy fractions.
  SimResult finish();

 private:
  SimModel& model_;
  const SimConfig& config_;
  std::mt19937_64 route_rng_;
  std::mt19937_64 jitter_rng_;
  std::map<std::pair<std::uint64_t, std::size_t>, std::size_t> memo_;
  struct Delivery {
    std::size_t first_replica = 0;
    std::size_t count = 0;
    bool misrouted = false;
  };
  std::map<std::pair<std::uint64_t, std::size_t>, Delivery> delivered_;
  std::vector<std::vector<std::pair<Seconds, Seconds>>> intervals_;
  std::vector<bool> done_;
  SimResult result_;
};

SimResult simulate_event_driven(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec,
                                const SimConfig& config);
SimResult simulate_lockstep(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec,
                            const SimConfig& config);

}  // namespace tpsched::detail
