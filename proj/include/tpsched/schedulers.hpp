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
#include <vector>

#include "tpsched/model.hpp"

namespace tpsched {

/// Makespan-oriented list scheduling: tasks by descending upward rank, each
/// on the node with the earliest finish time using insertion into idle gaps.
/// Parent files cost nothing when parent and child share a node.
Schedule heft_schedule(const TaskGraph& graph, const Cluster& cluster, const ExecutionMatrix& exec);

/// One placement decision of the throughput scheduler.
struct TpheftStep {
  TaskId task;
  /// Max schedule time over the resources the placement would touch, per node.
  std::map<NodeId, Seconds> candidate_cost;
  NodeId chosen;
};

/// Throughput-oriented list scheduling.
///
/// The entry task goes to its fastest node. Every later task, in descending
/// upward rank, tries each node: the node's accumulated time plus the task's
/// execution time, and each parent-node -> node link's accumulated time plus
/// the parent file. The task goes where the largest of these touched
/// resources is smallest (ties by node id). Child links are not considered
/// because children are not placed yet.
///
/// When `trace` is non-null it receives one step per placed task, entry first.
Schedule tpheft_schedule(const TaskGraph& graph, const Cluster& cluster, const ExecutionMatrix& exec,
                         std::vector<TpheftStep>* trace = nullptr);

/// User-supplied placements, validated against the graph and cluster.
Schedule manual_schedule(const TaskGraph& graph, const Cluster& cluster,
                         const std::map<TaskId, std::vector<Placement>>& assignment);

/// Each task on its own node, tasks in topological order onto nodes in id
/// order. Needs at least as many nodes as tasks.
Schedule one_task_per_node_schedule(const TaskGraph& graph, const Cluster& cluster);

}  // namespace tpsched
