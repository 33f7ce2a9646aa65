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

#include <optional>
#include <set>
#include <vector>

#include "tpsched/analysis.hpp"
#include "tpsched/model.hpp"

namespace tpsched {

/// Node splitting: all tasks of the bottleneck node get a replica on another
/// node carrying a fixed share of the node's workload. Replicas keep the
/// logical graph unchanged; only the placement lists grow.

struct SplitOptions {
  /// Nodes whose schedule time is at most this are split targets. 0 keeps
  /// the pool to strictly idle nodes.
  Seconds candidate_threshold = 0.0;
};

struct SplitDecision {
  NodeId source_node;
  NodeId target_node;
  double portion = 0.0;              ///< share of the source's workload shipped to the target
  Seconds bottleneck_time = 0.0;     ///< schedule time of the resource being relieved
  Seconds target_cost = 0.0;         ///< touched-resource max if the target took everything
  Seconds predicted_source_time = 0.0;  ///< (1 - portion) * bottleneck_time
  Seconds predicted_target_time = 0.0;  ///< portion * target_cost
};

/// Nodes eligible as split or duplication targets.
std::set<NodeId> idle_nodes(const ResourceTimes& times, const Cluster& cluster, Seconds threshold = 0.0);

/// Best target for moving the whole of `source` (relieving a resource whose
/// time is `relieved_time`) among `candidates`, or nullopt when none exists.
std::optional<SplitDecision> best_split_of(const NodeId& source, Seconds relieved_time, const ResourceTimes& times,
                                           const Schedule& schedule, const Cluster& cluster,
                                           const ExecutionMatrix& exec, const std::set<NodeId>& candidates);

/// Split decision for the current bottleneck. A link bottleneck is relieved
/// through whichever endpoint yields the smaller predicted max afterwards.
std::optional<SplitDecision> select_split(const ResourceTimes& times, const Schedule& schedule,
                                          const Cluster& cluster, const ExecutionMatrix& exec,
                                          const std::set<NodeId>& candidates);

/// Every placement on the source with portion p becomes p*(1-portion) on the
/// source and p*portion on the target. Throws ModelError when either share
/// would not be positive.
Schedule apply_split(const Schedule& schedule, const SplitDecision& decision);

struct SplitRound {
  SplitDecision decision;
  Resource bottleneck;
  Seconds max_before = 0.0;
  Seconds max_after = 0.0;
};

struct SplitResult {
  Schedule schedule;
  std::vector<SplitRound> rounds;
};

/// Repeats select/apply until candidates run out, `max_rounds` is reached,
/// or a split would not relieve the bottleneck without raising the max.
SplitResult iterate_split(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec,
                          std::size_t max_rounds, const SplitOptions& options = {});

}  // namespace tpsched
