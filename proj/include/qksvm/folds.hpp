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

#include <cstdint>
#include <string>
#include <vector>

#include "qksvm/common.hpp"
#include "qksvm/digest.hpp"
#include "qksvm/rng.hpp"

namespace qksvm {

struct FoldPlan {
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<int> assignments;  // fold index per sample

  Digest digest() const {
    Sha256 h;
    h.update_u64(static_cast<std::uint64_t>(k));
    h.update_u64(seed);
    for (int a : assignments) h.update_u64(static_cast<std::uint64_t>(a));
    return h.finish();
  }

  std::vector<int> train_indices(int fold) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] != fold) out.push_back(static_cast<int>(i));
    return out;
  }
  std::vector<int> eval_indices(int fold) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == fold) out.push_back(static_cast<int>(i));
    return out;
  }
};

// Stratified k-fold: deterministic per-class shuffle followed by round-robin
// assignment, so per-class fold sizes differ by at most one.
inline FoldPlan stratified_kfold(const std::vector<int>& labels, int k,
                                 std::uint64_t seed) {
  if (k < 2) throw ConfigError("folds: k must be >= 2");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(labels.size(), -1);
  const int classes[2] = {+1, -1};
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == classes[c]) members.push_back(i);
      else if (labels[i] != +1 && labels[i] != -1)
        throw DataError("folds: labels must be +1 or -1");
    }
    if (static_cast<int>(members.size()) < k)
      throw DataError("folds: class " + std::to_string(classes[c]) + " has " +
                      std::to_string(members.size()) + " samples, fewer than k=" +
                      std::to_string(k));
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(members);
    for (std::size_t t = 0; t < members.size(); ++t)
      plan.assignments[members[t]] = static_cast<int>(t % k);
  }
  return plan;
}

}  // namespace qksvm
