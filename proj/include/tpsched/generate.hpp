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

// Synthetic inputs for experiments and tests.

#pragma once

#include <cstdint>
#include <string>

#include "tpsched/model.hpp"

namespace tpsched {

enum class DagShape { diamond, linear, fork_join, layered_random };

/// Throws ModelError for unknown names.
DagShape parse_shape(const std::string& name);
const char* to_string(DagShape shape);

struct GenParams {
  DagShape shape = DagShape::diamond;
  std::size_t length = 5;      ///< linear: number of tasks
  std::size_t width = 4;       ///< fork_join: parallel branches; layered_random: max tasks per layer
  std::size_t layers = 3;      ///< layered_random: inner layers
  double edge_probability = 0.3;  ///< layered_random: extra edges between consecutive layers

  std::size_t nodes = 4;
  Seconds exec_min = 1.0;      ///< base execution time range per task
  Seconds exec_max = 10.0;
  double node_heterogeneity = 0.0;  ///< exec(t, n) = base(t) * (1 + h * u), u in [0, 1)
  Bytes file_min = 1'000'000;
  Bytes file_max = 5'000'000;
  LinkProfile link{0.0, 1e-6, 0.0, std::nullopt, std::nullopt};
  double link_heterogeneity = 0.0;  ///< each link's coefficients times (1 + h * u)

  double compute_scale = 1.0;  ///< multiplies every execution time
  double comm_scale = 1.0;     ///< multiplies every link coefficient
  std::uint64_t seed = 1;
};

struct Bundle {
  TaskGraph graph;
  Cluster cluster;
  ExecutionMatrix exec;
};

/// Tasks are named T0, T1, ... in topological order, with T0 the entry and
/// the last task the exit; nodes are n1, n2, ... with a profile on every
/// ordered pair. Identical params give identical bundles.
Bundle generate(const GenParams& params);

/// Same shape with only the given graph; the matrix and cluster come from params.
TaskGraph generate_graph(const GenParams& params);

/// Cluster with the src -> dst profile (and dst -> src when `both_ways`)
/// multiplied by `factor`.
Cluster inflate_link(const Cluster& cluster, const NodeId& src, const NodeId& dst, double factor,
                     bool both_ways = false);

}  // namespace tpsched
