// Copyright 2026 The risfl Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <stdexcept>
#include <string>

namespace risfl {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An input violates a documented invariant. The message names the field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// The MMSE denominator sum_k sqrt(p_k) hbar_{m,k} sigma_k^3 is numerically zero.
class SignalVanished : public Error {
 public:
  explicit SignalVanished(std::size_t cluster)
      : Error("cluster " + std::to_string(cluster) + ": cluster signal vanished"),
        cluster_(cluster) {}

  std::size_t cluster() const noexcept { return cluster_; }

 private:
  std::size_t cluster_;
};

namespace detail {

inline void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace detail
}  // namespace risfl
