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

// JSON and CSV formats. Field names are documented in schemas/.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpsched/analysis.hpp"
#include "tpsched/model.hpp"
#include "tpsched/profiling.hpp"
#include "tpsched/simulator.hpp"

namespace tpsched {

using Json = nlohmann::json;

/// Every reader throws FormatError with the offending field on malformed input.

TaskGraph graph_from_json(const Json& j);
Json to_json(const TaskGraph& graph);

/// Links may set "bidirectional": true to install the profile both ways.
Cluster cluster_from_json(const Json& j);
Json to_json(const Cluster& cluster);

ExecutionMatrix matrix_from_json(const Json& j);
Json to_json(const ExecutionMatrix& exec);

/// `{"T0": [{"n1": 0.5}, {"n2": 0.5}], ...}`; a bare node name stands
/// for a single full placement.
std::map<TaskId, std::vector<Placement>> assignment_from_json(const Json& j);
Json to_json(const std::map<TaskId, std::vector<Placement>>& assignment);

Json read_json(const std::filesystem::path& path);
/// Two-space indented, keys sorted, trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

/// CSV with header `size_bytes,time_s`.
std::vector<TransferSample> read_transfer_samples(std::istream& in, const std::string& source = "<stream>");
/// CSV with header `task,node,time_s`.
std::vector<ExecSample> read_exec_samples(std::istream& in, const std::string& source = "<stream>");
std::vector<TransferSample> read_transfer_samples(const std::filesystem::path& path);
std::vector<ExecSample> read_exec_samples(const std::filesystem::path& path);

/// Throughput in the reporting unit, instances per 1000 s.
inline double per_kilosecond(double per_second) { return per_second * 1000.0; }

/// Per-resource times, bottleneck and throughput as aligned text.
std::string format_analysis(const ResourceTimes& times);
/// Simulated throughput, busy fractions and the delta against `predicted`.
std::string format_simulation(const SimResult& result, const ResourceTimes& predicted);

}  // namespace tpsched
