// Copyright 2026 The qksvm Authors
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

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace qksvm {

// Error taxonomy mapped onto the CLI exit-code contract:
//   ConfigError -> 2, DataError -> 3, InternalError -> 4.
class Error : public std::runtime_error {
 public:
  enum class Kind { kConfig, kData, kInternal };
  Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(Kind::kConfig, msg) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(Kind::kData, msg) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& msg) : Error(Kind::kInternal, msg) {}
};

// Fixed 9-significant-digit rendering used by every CSV/table writer so that
// report files diff reproducibly.
inline std::string format_sig9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Shortest exact round-trip rendering for archival values (model records).
inline std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace qksvm
