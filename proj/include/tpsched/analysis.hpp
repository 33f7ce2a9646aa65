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
#include <utility>

#include "tpsched/model.hpp"

namespace tpsched {

/// Busy time of each resource within one steady-state period.
/// Every cluster node is present; links appear once they carry a flow.
using ResourceTimes = std::map<Resource, Seconds>;

struct ThroughputEstimate {
  Seconds max_schedule_time = 0.0;
  Resource bottleneck;
  double throughput = 0.0;  ///< instances / second
};

/// Per-resource schedule times. A parent replica with portion pp and a child
/// replica with portion pc on different nodes exchange pp*pc of the file per
/// instance over the directed link between them.
ResourceTimes resource_times(const Schedule& schedule, const Cluster& cluster, const ExecutionMatrix& exec);

/// Largest schedule time; ties favour nodes, then the smaller id.
std::pair<Resource, Seconds> bottleneck(const ResourceTimes& times);

/// Throws ModelError when every time is zero.
ThroughputEstimate predicted_throughput(const ResourceTimes& times);

inline Seconds max_schedule_time(const ResourceTimes& times) { return bottleneck(times).second; }

}  // namespace tpsched
