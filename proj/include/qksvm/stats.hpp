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
#include <limits>
#include <vector>

#include "qksvm/common.hpp"

namespace qksvm {

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw DataError("mean: empty vector");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation (n-1 denominator); 0 for a single element.
inline double sample_std(const std::vector<double>& v) {
  if (v.empty()) throw DataError("sample_std: empty vector");
  if (v.size() == 1) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz's method).
inline double incbeta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw InternalError("incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DataError("incomplete_beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log(1.0 - x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * detail::incbeta_cf(a, b, x) / a;
  return 1.0 - bt * detail::incbeta_cf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of Student's t with df degrees of freedom:
// p = I_x(df/2, 1/2) with x = df / (df + t^2).
inline double student_t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double x = df / (df + t * t);
  double p = incomplete_beta(0.5 * df, 0.5, x);
  return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

enum class EffectLabel { kNegligible, kSmall, kMedium, kLarge };

inline const char* to_string(EffectLabel e) {
  switch (e) {
    case EffectLabel::kNegligible: return "negligible";
    case EffectLabel::kSmall: return "small";
    case EffectLabel::kMedium: return "medium";
    case EffectLabel::kLarge: return "large";
  }
  return "?";
}

// |d| bands with closed lower bounds: <0.2 negligible, 0.2-0.5 small,
// 0.5-0.8 medium, >=0.8 large.
inline EffectLabel effect_label(double d) {
  const double a = std::abs(d);
  if (a < 0.2) return EffectLabel::kNegligible;
  if (a < 0.5) return EffectLabel::kSmall;
  if (a < 0.8) return EffectLabel::kMedium;
  return EffectLabel::kLarge;
}

struct MetricComparison {
  double delta = 0.0;  // mean(a) - mean(b)
  double t_statistic = 0.0;
  double p_value = 1.0;
  double cohens_d = 0.0;
  EffectLabel label = EffectLabel::kNegligible;
};

// Welch two-sample t-test (Welch-Satterthwaite degrees of freedom) plus
// Cohen's d with pooled standard deviation. Degenerate cases: identical
// vectors give t=0, p=1, d=0; zero pooled variance with unequal means gives
// an infinite-d sentinel labeled large.
inline MetricComparison compare_models(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw DataError("compare_models: need at least 2 folds per side");
  MetricComparison r;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean(a), mb = mean(b);
  const double sa = sample_std(a), sb = sample_std(b);
  r.delta = ma - mb;

  const double va = sa * sa / na, vb = sb * sb / nb;
  if (va + vb == 0.0) {
    if (r.delta == 0.0) {
      r.t_statistic = 0.0;
      r.p_value = 1.0;
      r.cohens_d = 0.0;
      r.label = EffectLabel::kNegligible;
    } else {
      const double inf = std::numeric_limits<double>::infinity();
      r.t_statistic = std::copysign(inf, r.delta);
      r.p_value = 0.0;
      r.cohens_d = std::copysign(inf, r.delta);
      r.label = EffectLabel::kLarge;
    }
    return r;
  }

  r.t_statistic = r.delta / std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) /
                    (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p_value = student_t_two_sided_p(r.t_statistic, df);

  const double pooled_var =
      ((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / (na + nb - 2.0);
  if (pooled_var == 0.0) {
    const double inf = std::numeric_limits<double>::infinity();
    r.cohens_d = r.delta == 0.0 ? 0.0 : std::copysign(inf, r.delta);
  } else {
    r.cohens_d = r.delta / std::sqrt(pooled_var);
  }
  r.label = effect_label(r.cohens_d);
  return r;
}

}  // namespace qksvm
