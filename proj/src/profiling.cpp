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

#include "tpsched/profiling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace tpsched {

namespace {

using Mat3 = std::array<std::array<long double, 3>, 3>;
using Vec3 = std::array<long double, 3>;

long double norm1(const Mat3& m) {
  long double best = 0;
  for (int j = 0; j < 3; ++j) {
    long double col = 0;
    for (int i = 0; i < 3; ++i) col += std::fabs(m[i][j]);
    best = std::max(best, col);
  }
  return best;
}

/// Gauss-Jordan with partial pivoting; returns false for a singular matrix.
bool invert(Mat3 m, Mat3& inv) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) inv[i][j] = (i == j) ? 1 : 0;
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
    if (m[pivot][col] == 0) return false;
    std::swap(m[pivot], m[col]);
    std::swap(inv[pivot], inv[col]);
    const long double d = m[col][col];
    for (int j = 0; j < 3; ++j) {
      m[col][j] /= d;
      inv[col][j] /= d;
    }
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const long double f = m[r][col];
      for (int j = 0; j < 3; ++j) {
        m[r][j] -= f * m[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return true;
}

constexpr long double kMaxCondition = 1e12L;

}  // namespace

double scaled_residual(std::span<const TransferSample> samples, double size_scale,
                       const std::array<double, 3>& k) {
  long double rss = 0;
  for (const auto& s : samples) {
    const long double x = static_cast<long double>(s.size) / size_scale;
    const long double r = s.time - (k[0] * x * x + k[1] * x + k[2]);
    rss += r * r;
  }
  return static_cast<double>(rss);
}

QuadraticFit fit_quadratic(std::span<const TransferSample> samples) {
  std::vector<TransferSample> sorted(samples.begin(), samples.end());
  for (const auto& s : sorted)
    if (!std::isfinite(s.time) || s.time < 0.0) throw FitError(fmt::format("invalid sample time {}", s.time));
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& x, const auto& y) { return x.size != y.size ? x.size < y.size : x.time < y.time; });

  std::set<Bytes> distinct;
  for (const auto& s : sorted) distinct.insert(s.size);
  if (distinct.size() < 3)
    throw FitError(fmt::format("quadratic fit needs 3 distinct sizes, got {} ({} samples)", distinct.size(),
                               sorted.size()));

  QuadraticFit fit;
  fit.size_scale = static_cast<double>(*distinct.rbegin());

  Mat3 m{};
  Vec3 rhs{};
  for (const auto& s : sorted) {
    const long double x = static_cast<long double>(s.size) / fit.size_scale;
    const long double pw[5] = {1, x, x * x, x * x * x, x * x * x * x};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] += pw[4 - i - j];
      rhs[i] += pw[2 - i] * s.time;
    }
  }

  Mat3 inv{};
  if (!invert(m, inv)) throw FitError("normal equations are singular");
  const long double cond = norm1(m) * norm1(inv);
  fit.condition = static_cast<double>(cond);
  if (!(cond < kMaxCondition))
    throw FitError(fmt::format("normal equations are ill-conditioned (condition {:.3g} >= {:.0g})",
                               fit.condition, static_cast<double>(kMaxCondition)));

  for (int i = 0; i < 3; ++i) {
    long double v = 0;
    for (int j = 0; j < 3; ++j) v += inv[i][j] * rhs[j];
    fit.scaled[i] = static_cast<double>(v);
  }
  fit.residual_sum_squares = scaled_residual(sorted, fit.size_scale, fit.scaled);

  fit.profile.a = fit.scaled[0] / (fit.size_scale * fit.size_scale);
  fit.profile.b = fit.scaled[1] / fit.size_scale;
  fit.profile.c = fit.scaled[2];
  fit.profile.min_size = *distinct.begin();
  fit.profile.max_size = *distinct.rbegin();
  return fit;
}

ExecutionMatrix build_execution_matrix(std::span<const ExecSample> samples, const TaskGraph& graph,
                                       const Cluster& cluster) {
  std::map<std::pair<TaskId, NodeId>, std::pair<double, std::size_t>> acc;
  for (const auto& s : samples) {
    if (!std::isfinite(s.time) || !(s.time > 0.0))
      throw ModelError(fmt::format("invalid exec sample ({}, {}) = {}", s.task.str(), s.node.str(), s.time));
    auto& [sum, n] = acc[{s.task, s.node}];
    sum += s.time;
    ++n;
  }
  ExecutionMatrix out;
  std::vector<std::string> missing;
  for (const auto& t : graph.tasks()) {
    if (graph.is_duplicate(t)) continue;
    for (const auto& node : cluster.nodes()) {
      auto it = acc.find({t, node});
      if (it == acc.end()) {
        missing.push_back(fmt::format("({}, {})", t.str(), node.str()));
        continue;
      }
      out.set(t, node, it->second.first / double(it->second.second));
    }
  }
  if (!missing.empty()) throw ModelError(fmt::format("no exec samples for {}", fmt::join(missing, ", ")));
  return out;
}

}  // namespace tpsched
