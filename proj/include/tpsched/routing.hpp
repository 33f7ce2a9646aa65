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

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "tpsched/model.hpp"

namespace tpsched {

/// How instances are spread over the replicas of a split task.
enum class RoutingMode {
  probability,  ///< seeded draw from the portion distribution
  hash,         ///< deterministic function of the instance id
};

/// How a hash value picks a replica.
enum class HashPlacement {
  /// Slot `hash % wheel.size()` of a portion-weighted interleaved wheel.
  /// For equal portions the wheel is 0, 1, ..., n-1, i.e. plain modulo.
  weighted_wheel,
  /// `hash % n` regardless of portions.
  modulo,
};

using HashFunction = std::function<std::uint64_t(std::string_view)>;

/// Decimal parse of a system-assigned instance id. Throws ModelError for
/// anything but a non-empty run of digits.
std::uint64_t decimal_hash(std::string_view instance_id);

/// Multi-parent children need every parent file of an instance on one
/// replica, so they are hash-routed; everything else uses probability.
RoutingMode routing_mode_for(const TaskGraph& graph, const TaskId& child);

/// Precomputed replica lookup for one replica list.
class ReplicaSelector {
 public:
  explicit ReplicaSelector(std::span<const Placement> replicas,
                           HashPlacement placement = HashPlacement::weighted_wheel);

  std::size_t size() const { return cumulative_.size(); }
  std::size_t by_hash(std::uint64_t hash) const;
  /// `u` in [0, 1).
  std::size_t by_probability(double u) const;
  const std::vector<std::uint32_t>& wheel() const { return wheel_; }

 private:
  std::vector<double> cumulative_;
  std::vector<std::uint32_t> wheel_;
};

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double unit_draw(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

struct RoutingOptions {
  HashPlacement placement = HashPlacement::weighted_wheel;
  HashFunction hash = decimal_hash;
};

/// Replica index for one instance of `child`. Probability mode over two or
/// more replicas consumes one draw from `rng`; hash mode never does.
std::size_t choose_replica(const TaskId& child, std::span<const Placement> replicas, std::string_view instance_id,
                           RoutingMode mode, std::mt19937_64& rng, const RoutingOptions& options = {});

}  // namespace tpsched
