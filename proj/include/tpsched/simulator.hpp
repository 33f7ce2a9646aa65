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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "tpsched/model.hpp"
#include "tpsched/routing.hpp"

namespace tpsched {

enum class SimMode {
  /// Work-conserving discrete-event execution: a resource starts the next
  /// queued item as soon as it is free.
  event_driven,
  /// Stage-synchronous execution: in each stage every resource handles at
  /// most one instance per hosted task (or per edge, for links), back to
  /// back from the stage start; outputs become usable in the next stage,
  /// and the stage lasts as long as its busiest resource.
  lockstep,
};

enum class ReplicaRouting {
  /// One replica choice per (instance, child task), hash-routed for
  /// multi-parent children.
  per_instance,
  /// Every file draws its child replica independently by portion. Breaks
  /// multi-parent assembly on split children; diagnostic only.
  per_file_independent,
};

struct SimConfig {
  std::size_t num_instances = 300;
  /// Completions ignored when measuring; defaults to default_warmup().
  std::optional<std::size_t> warmup_instances;
  /// 0 injects every instance at t = 0 (saturating source).
  Seconds input_interarrival = 0.0;
  std::uint64_t seed = 1;
  /// Relative half-width of uniform noise applied to every duration.
  double jitter = 0.0;
  SimMode mode = SimMode::event_driven;
  ReplicaRouting routing = ReplicaRouting::per_instance;
  RoutingOptions hashing;
  bool record_events = false;
};

/// max(2 * tasks, 20), reduced to a quarter of the run when the run is too short.
std::size_t default_warmup(const TaskGraph& graph, std::size_t num_instances);

struct Completion {
  std::uint64_t instance = 0;
  Seconds time = 0.0;
};

enum class SimEventKind { exec_start, exec_end, transfer_start, transfer_end, deliver, complete };

const char* to_string(SimEventKind kind);

/// One row of the event log. For transfers `task` is the sender and `peer`
/// the receiving task; `replica` is the receiving replica.
struct SimEvent {
  Seconds time = 0.0;
  Resource resource;
  SimEventKind kind = SimEventKind::exec_start;
  std::uint64_t instance = 0;
  TaskId task;
  TaskId peer;
  std::size_t replica = 0;
};

struct SimResult {
  double throughput = 0.0;  ///< instances / second over post-warmup completions
  Seconds steady_state_period = 0.0;
  std::size_t warmup = 0;
  std::vector<Completion> completions;  ///< sorted by time
  /// Busy share of each resource over the steady-state window, which spans
  /// from completion `warmup` to completion `n - 1 - warmup`.
  std::map<Resource, double> busy_fraction;
  std::map<Resource, Seconds> busy_time;  ///< over the whole run
  /// Executions per replica, in placement order.
  std::map<TaskId, std::vector<std::size_t>> replica_load;
  std::size_t instances_injected = 0;
  std::size_t instances_completed = 0;
  /// (instance, child) pairs whose parent files reached different replicas.
  std::size_t misrouted_instances = 0;
  std::vector<SimEvent> events;  ///< only when record_events is set
};

/// Runs the schedule. Throws DeadlockError when instances remain in flight
/// with nothing left to run, and ModelError for invalid inputs or runs too
/// short to measure.
SimResult simulate(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec,
                   const SimConfig& config);

/// (completions after warmup - 1) / (last - first post-warmup completion time).
/// `completions` must be sorted by time. Throws ModelError with fewer than
/// two post-warmup completions.
double measure_throughput(const std::vector<Completion>& completions, std::size_t warmup);
inline double measure_throughput(const SimResult& result) {
  return measure_throughput(result.completions, result.warmup);
}

/// CSV with header `time,resource,event,instance,task`.
void write_event_log_csv(std::ostream& out, const std::vector<SimEvent>& events);

}  // namespace tpsched
