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

// Scheduler -> refiner -> simulator pipelines over a grid of bundles and
// scale factors, reported as throughput tables.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tpsched/generate.hpp"
#include "tpsched/io.hpp"
#include "tpsched/simulator.hpp"

namespace tpsched {

enum class SchedulerKind { heft, tpheft, manual, one_per_node };
enum class RefineKind { split, dup };

/// "heft", "tpheft+split", "manual+dup", ...
struct Pipeline {
  SchedulerKind scheduler = SchedulerKind::heft;
  std::optional<RefineKind> refine;

  std::string label() const;
  friend bool operator==(const Pipeline&, const Pipeline&) = default;
};

/// Throws ModelError for unknown labels.
Pipeline parse_pipeline(const std::string& label);

struct ExperimentBundle {
  std::string name;
  Bundle bundle;
  std::optional<std::map<TaskId, std::vector<Placement>>> manual;
};

struct ExperimentConfig {
  std::vector<ExperimentBundle> bundles;
  std::vector<Pipeline> pipelines;
  std::vector<double> compute_scales{1.0};
  std::vector<double> comm_scales{1.0};
  SimConfig sim;
  std::size_t max_rounds = 10;
  bool parallel = true;
};

/// Reads a config file; relative bundle paths resolve against the file's
/// directory. Throws FormatError on malformed input and ModelError for an
/// empty pipeline list.
ExperimentConfig experiment_config_from_json(const Json& j, const std::filesystem::path& base_dir);

struct Cell {
  std::string row;       ///< bundle name plus scale factors
  std::string pipeline;
  std::optional<double> predicted;  ///< per 1000 s
  std::optional<double> simulated;  ///< per 1000 s
  std::optional<std::string> baseline;
  std::optional<double> delta_percent;  ///< simulated versus the baseline, unrounded
  std::size_t refine_rounds = 0;
  std::string error;     ///< empty on success
};

struct ExperimentReport {
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<Cell> cells;  ///< row-major, one per (row, column)

  const Cell& at(std::size_t row, std::size_t column) const { return cells[row * columns.size() + column]; }
};

/// Baseline of `p` among `all`: X for X+refine, heft for tpheft.
std::optional<Pipeline> baseline_of(const Pipeline& p, const std::vector<Pipeline>& all);

/// Runs every cell. Failures are captured per cell.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// One line per cell.
void write_report_csv(std::ostream& out, const ExperimentReport& report);
/// Rows by columns, cells like "946 (+221.7%)".
std::string format_report_table(const ExperimentReport& report);

}  // namespace tpsched
