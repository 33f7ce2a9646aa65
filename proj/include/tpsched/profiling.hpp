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

#include <array>
#include <span>
#include <vector>

#include "tpsched/model.hpp"

namespace tpsched {

struct TransferSample {
  Bytes size = 0;
  Seconds time = 0.0;
};

struct ExecSample {
  TaskId task;
  NodeId node;
  Seconds time = 0.0;
};

/// Least-squares quadratic in sizes rescaled to [0, 1] by the largest size.
struct QuadraticFit {
  LinkProfile profile;              ///< coefficients in bytes, with fitted size range
  double size_scale = 1.0;          ///< largest sample size
  std::array<double, 3> scaled{};   ///< (a, b, c) against size / size_scale
  double residual_sum_squares = 0.0;
  double condition = 1.0;           ///< 1-norm condition estimate of the normal matrix
};

/// Residual sum of squares of `coefficients` (scaled units) on `samples`.
double scaled_residual(std::span<const TransferSample> samples, double size_scale,
                       const std::array<double, 3>& coefficients);

/// Throws FitError with fewer than three distinct sizes or an ill-conditioned system.
QuadraticFit fit_quadratic(std::span<const TransferSample> samples);

inline LinkProfile fit_link_profile(std::span<const TransferSample> samples) { return fit_quadratic(samples).profile; }

/// Mean of the samples per (task, node). Throws ModelError naming every missing pair.
ExecutionMatrix build_execution_matrix(std::span<const ExecSample> samples, const TaskGraph& graph,
                                       const Cluster& cluster);

}  // namespace tpsched
