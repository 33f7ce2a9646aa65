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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tpsched/analysis.hpp"
#include "tpsched/model.hpp"

namespace tpsched {

/// Task duplication around a slow link. The tasks on the link's source node
/// that feed tasks on its destination node are copied to another node; the
/// copies receive the same parent files and take over the transfers to the
/// destination-side children. Works on unsplit schedules only.

struct DupChoice {
  Resource link;                ///< the bottleneck link being bypassed
  NodeId target;                ///< node receiving the copies
  std::vector<TaskId> src_tasks;
  /// For each copied task, its children on the link's destination node.
  std::map<TaskId, std::vector<TaskId>> rerouted_children;
  Seconds predicted_cost = 0.0;     ///< max over touched resources with the copies placed
  Seconds bottleneck_time = 0.0;
};

/// nullopt when the bottleneck is a node, no candidate exists, or the best
/// candidate would not beat the bottleneck time.
std::optional<DupChoice> find_best_dup_node(const ResourceTimes& times, const Schedule& schedule,
                                            const Cluster& cluster, const ExecutionMatrix& exec,
                                            const std::set<NodeId>& candidates);

/// Rewrites the graph and places the copies (named `<task>-dup`, `-dup2`, ...).
/// Does not collect zombies.
Schedule apply_duplication(const Schedule& schedule, const DupChoice& choice);

/// Drops every task without a path to the exit, with its placements and
/// edges. If the entry itself is dropped, its surviving copy becomes the
/// entry. Throws ModelError when the result no longer connects entry to exit.
Schedule garbage_collect_zombies(const Schedule& schedule, std::vector<TaskId>* removed = nullptr);

struct DupRound {
  DupChoice choice;
  Seconds max_before = 0.0;
  Seconds max_after = 0.0;
  std::vector<TaskId> collected;
};

struct DupResult {
  Schedule schedule;
  std::vector<DupRound> rounds;
  std::string stop_reason;
};

/// Repeats find/apply/collect while the bottleneck is a link and an
/// improving candidate exists, up to `max_rounds`.
DupResult iterate_dup(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec,
                      std::size_t max_rounds);

}  // namespace tpsched
