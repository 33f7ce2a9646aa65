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

#include "tpsched/routing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace tpsched {

std::uint64_t decimal_hash(std::string_view id) {
  std::uint64_t value = 0;
  const auto* end = id.data() + id.size();
  auto [ptr, ec] = std::from_chars(id.data(), end, value);
  if (id.empty() || ec != std::errc{} || ptr != end || id.front() == '-' || id.front() == '+')
    throw ModelError(fmt::format("instance id '{}' is not a decimal number", id));
  return value;
}

RoutingMode routing_mode_for(const TaskGraph& graph, const TaskId& child) {
  return graph.parent_count(child) > 1 ? RoutingMode::hash : RoutingMode::probability;
}

namespace {

constexpr std::size_t kMaxWheel = 1000;

/// Slot counts per replica summing to the wheel length.
std::vector<std::uint32_t> slot_counts(const std::vector<double>& portions) {
  const std::size_t n = portions.size();
  const double total = [&] {
    double s = 0;
    for (double p : portions) s += p;
    return s;
  }();

  // Use the shortest wheel on which every portion is (nearly) a whole number of slots.
  std::size_t length = kMaxWheel;
  for (std::size_t l = n; l <= kMaxWheel; ++l) {
    bool exact = true;
    for (double p : portions) {
      const double slots = p / total * double(l);
      if (std::abs(slots - std::round(slots)) > 1e-6 || std::round(slots) < 1) {
        exact = false;
        break;
      }
    }
    if (exact) {
      length = l;
      break;
    }
  }

  std::vector<std::uint32_t> counts(n);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double slots = portions[i] / total * double(length);
    counts[i] = static_cast<std::uint32_t>(std::floor(slots + 1e-9));
    assigned += counts[i];
    remainders.emplace_back(slots - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t k = 0; assigned < length; ++k, ++assigned) ++counts[remainders[k % n].second];
  // Every replica keeps at least one slot.
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] == 0) {
      auto big = std::max_element(counts.begin(), counts.end());
      --*big;
      counts[i] = 1;
    }
  }
  return counts;
}

}  // namespace

ReplicaSelector::ReplicaSelector(std::span<const Placement> replicas, HashPlacement placement) {
  if (replicas.empty()) throw ModelError("replica list is empty");
  std::vector<double> portions;
  double acc = 0.0;
  for (const auto& r : replicas) {
    portions.push_back(r.portion);
    acc += r.portion;
    cumulative_.push_back(acc);
  }
  for (auto& c : cumulative_) c /= acc;

  if (placement == HashPlacement::modulo) {
    for (std::uint32_t i = 0; i < replicas.size(); ++i) wheel_.push_back(i);
    return;
  }

  // Smooth weighted round robin over the slot counts interleaves replicas
  // evenly; equal counts give 0, 1, ..., n-1 repeated.
  const auto counts = slot_counts(portions);
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  std::vector<std::int64_t> current(counts.size(), 0);
  wheel_.reserve(static_cast<std::size_t>(total));
  for (std::int64_t step = 0; step < total; ++step) {
    std::size_t pick = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      current[i] += counts[i];
      if (current[i] > current[pick]) pick = i;
    }
    current[pick] -= total;
    wheel_.push_back(static_cast<std::uint32_t>(pick));
  }
}

std::size_t ReplicaSelector::by_hash(std::uint64_t hash) const { return wheel_[hash % wheel_.size()]; }

std::size_t ReplicaSelector::by_probability(double u) const {
  for (std::size_t i = 0; i < cumulative_.size(); ++i)
    if (u < cumulative_[i]) return i;
  return cumulative_.size() - 1;
}

std::size_t choose_replica(const TaskId& child, std::span<const Placement> replicas, std::string_view instance_id,
                           RoutingMode mode, std::mt19937_64& rng, const RoutingOptions& options) {
  if (replicas.empty()) throw ModelError(fmt::format("task {} has no replicas", child.str()));
  if (replicas.size() == 1) {
    if (mode == RoutingMode::hash) (void)options.hash(instance_id);
    return 0;
  }
  const ReplicaSelector selector(replicas, options.placement);
  if (mode == RoutingMode::hash) return selector.by_hash(options.hash(instance_id));
  return selector.by_probability(unit_draw(rng));
}

}  // namespace tpsched
