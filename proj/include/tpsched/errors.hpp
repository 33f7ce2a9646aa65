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

#include <stdexcept>
#include <string>

namespace tpsched {

/// Malformed or inconsistent graph, cluster, matrix or schedule.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Regression could not produce a usable profile.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input files that do not parse or do not match their schema.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulation stopped with instances still in flight.
class DeadlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tpsched
