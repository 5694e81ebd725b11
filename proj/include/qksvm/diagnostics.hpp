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

#include <vector>

#include "qksvm/common.hpp"
#include "qksvm/stats.hpp"

namespace qksvm {

// Composite diagnostics computed on fold means. These sit in a separate
// report section, off the headline path; the margin term is a raw
// within-kernel quantity and is not normalized before weighting.

// 0.4 * margin + 0.3 * accuracy + 0.3 * (1 - FPR).
inline double sep_score(double margin_mean, double acc_mean, double fpr_mean) {
  if (acc_mean < 0.0 || acc_mean > 1.0) throw DataError("sep_score: accuracy not in [0,1]");
  if (fpr_mean < 0.0 || fpr_mean > 1.0) throw DataError("sep_score: FPR not in [0,1]");
  if (margin_mean < 0.0) throw DataError("sep_score: margin must be >= 0");
  return 0.4 * margin_mean + 0.3 * acc_mean + 0.3 * (1.0 - fpr_mean);
}

// 0.4 * accuracy + 0.4 * margin - 0.2 * z-scored accuracy std. The z-scoring
// happens across the models compared within one dataset; with fewer than two
// models the z-score is defined as 0.
inline double sec_score(double acc_mean, double margin_mean, double sigma_acc_z) {
  return 0.4 * acc_mean + 0.4 * margin_mean - 0.2 * sigma_acc_z;
}

// margin - lambda * margin std across folds; a proportional (unitless)
// diagnostic, not an absolute robustness measure.
inline double robustness_index(double margin_mean, double margin_sigma,
                               double lambda = 1.0) {
  if (!(lambda > 0.0)) throw ConfigError("robustness_index: lambda must be positive");
  return margin_mean - lambda * margin_sigma;
}

// z-scores a small vector across its entries (sample std); degenerate inputs
// (size < 2 or zero variance) map to all-zeros.
inline std::vector<double> z_scores(const std::vector<double>& v) {
  std::vector<double> z(v.size(), 0.0);
  if (v.size() < 2) return z;
  const double m = mean(v);
  const double s = sample_std(v);
  if (s == 0.0) return z;
  for (std::size_t i = 0; i < v.size(); ++i) z[i] = (v[i] - m) / s;
  return z;
}

}  // namespace qksvm
