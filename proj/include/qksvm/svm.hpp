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

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "qksvm/common.hpp"
#include "qksvm/kernels.hpp"

namespace qksvm {

struct SolverConfig {
  double C = 1.0;
  double kkt_tol = 1e-3;
  long max_passes = 200000;  // cap on pairwise updates
  std::uint64_t seed = 0;    // recorded for provenance; the solver is deterministic

  void validate() const {
    if (!(C > 0.0)) throw ConfigError("svm: C must be positive");
    if (!(kkt_tol > 0.0)) throw ConfigError("svm: kkt_tol must be positive");
    if (max_passes < 1) throw ConfigError("svm: max_passes must be >= 1");
  }
};

// Soft-margin SVM trained in the dual from a precomputed Gram matrix.
// Labels use +1 for bona fide and -1 for spoof.
struct TrainedSvm {
  Eigen::VectorXd alphas;            // in [0, C]^N
  double bias = 0.0;
  std::vector<int> labels;           // {-1, +1}
  std::vector<int> support_indices;  // alpha > 0
  double w_norm_sq = 0.0;            // alpha' (yy' o K) alpha
  double dual_objective = 0.0;       // sum(alpha) - w_norm_sq / 2
  bool converged = false;
  long iterations = 0;
  double final_violation = 0.0;
  SolverConfig config;
};

// Solves  max  sum(alpha) - 1/2 sum alpha_i alpha_j y_i y_j K_ij
//         s.t. 0 <= alpha <= C,  sum alpha_i y_i = 0
// by sequential pairwise updates: first index is the maximal KKT violator in
// the "up" set, the second maximizes the step (second-order gain) over the
// "low" set; ties break to the lowest index. Terminates when the maximal
// violation m - M drops to kkt_tol, or at max_passes (reported, not fatal).
inline TrainedSvm train(const GramMatrix& gram, const std::vector<int>& labels,
                        const SolverConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd& K = gram.values;
  const Eigen::Index n = K.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw DataError("svm train: label count does not match Gram size");
  int pos = 0, neg = 0;
  for (int y : labels) {
    if (y == 1) ++pos;
    else if (y == -1) ++neg;
    else throw DataError("svm train: labels must be +1 or -1");
  }
  if (pos == 0 || neg == 0) throw DataError("svm train: both classes required");
  if (!K.allFinite()) throw DataError("svm train: non-finite Gram entries");

  const double C = cfg.C;
  constexpr double kTau = 1e-12;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);  // u_t = sum_j alpha_j y_j K_tj
  std::vector<double> y(n);
  for (Eigen::Index t = 0; t < n; ++t) y[t] = labels[static_cast<std::size_t>(t)];

#ifndef NDEBUG
  double objective_min_form = 0.0;  // F = 1/2 a'Qa - 1'a, monotone non-increasing
#endif

  long iter = 0;
  double violation = std::numeric_limits<double>::infinity();
  bool converged = false;
  while (iter < cfg.max_passes) {
    // Working-pair selection.
    Eigen::Index i = -1;
    double m = -std::numeric_limits<double>::infinity();
    double M = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double grad = y[t] - u[t];
      const bool in_up = (y[t] > 0.0) ? (alpha[t] < C) : (alpha[t] > 0.0);
      const bool in_low = (y[t] > 0.0) ? (alpha[t] > 0.0) : (alpha[t] < C);
      if (in_up && grad > m) {
        m = grad;
        i = t;
      }
      if (in_low && grad < M) M = grad;
    }
    violation = m - M;
    if (violation <= cfg.kkt_tol) {
      converged = true;
      break;
    }
    Eigen::Index j = -1;
    double best_gain = -1.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const bool in_low = (y[t] > 0.0) ? (alpha[t] > 0.0) : (alpha[t] < C);
      if (!in_low || t == i) continue;
      const double b = m - (y[t] - u[t]);
      if (b <= 0.0) continue;
      double a = K(i, i) + K(t, t) - 2.0 * K(i, t);
      if (a < kTau) a = kTau;
      const double gain = b * b / a;
      if (gain > best_gain) {
        best_gain = gain;
        j = t;
      }
    }
    if (j < 0) {
      converged = true;  // no feasible progress direction remains
      break;
    }

    // Two-variable subproblem with the equality constraint eliminated.
    const double Ei = u[i] - y[i], Ej = u[j] - y[j];
    double eta = K(i, i) + K(j, j) - 2.0 * K(i, j);
    if (eta < kTau) eta = kTau;
    double lo, hi;
    if (y[i] * y[j] < 0.0) {
      lo = std::max(0.0, alpha[j] - alpha[i]);
      hi = std::min(C, C + alpha[j] - alpha[i]);
    } else {
      lo = std::max(0.0, alpha[i] + alpha[j] - C);
      hi = std::min(C, alpha[i] + alpha[j]);
    }
    double aj_new = alpha[j] + y[j] * (Ei - Ej) / eta;
    aj_new = std::min(hi, std::max(lo, aj_new));
    const double dj = aj_new - alpha[j];
    if (std::abs(dj) < 1e-16) break;  // numerically stuck; report non-converged
    double ai_new = alpha[i] + y[i] * y[j] * (alpha[j] - aj_new);
    ai_new = std::min(C, std::max(0.0, ai_new));
    const double di = ai_new - alpha[i];

#ifndef NDEBUG
    {
      const double gi = y[i] * u[i] - 1.0, gj = y[j] * u[j] - 1.0;
      const double qii = K(i, i), qjj = K(j, j), qij = y[i] * y[j] * K(i, j);
      const double delta_f = gi * di + gj * dj +
                             0.5 * (qii * di * di + 2.0 * qij * di * dj + qjj * dj * dj);
      assert(delta_f <= 1e-10 && "dual objective must be non-decreasing");
      objective_min_form += delta_f;
      (void)objective_min_form;
    }
#endif

    alpha[i] = ai_new;
    alpha[j] = aj_new;
    u += (di * y[i]) * K.col(i) + (dj * y[j]) * K.col(j);
    ++iter;
  }

  TrainedSvm model;
  model.config = cfg;
  model.alphas = alpha;
  model.labels = labels;
  model.converged = converged;
  model.iterations = iter;
  model.final_violation = violation;
  for (Eigen::Index t = 0; t < n; ++t)
    if (alpha[t] > 0.0) model.support_indices.push_back(static_cast<int>(t));

  // Bias: average over unbounded support vectors; midpoint of the feasible
  // interval when none exist.
  const double edge = 1e-8 * C;
  double b_sum = 0.0;
  int b_count = 0;
  for (Eigen::Index t = 0; t < n; ++t)
    if (alpha[t] > edge && alpha[t] < C - edge) {
      b_sum += y[t] - u[t];
      ++b_count;
    }
  if (b_count > 0) {
    model.bias = b_sum / b_count;
  } else {
    double m = -std::numeric_limits<double>::infinity();
    double M = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double grad = y[t] - u[t];
      const bool in_up = (y[t] > 0.0) ? (alpha[t] < C) : (alpha[t] > 0.0);
      const bool in_low = (y[t] > 0.0) ? (alpha[t] > 0.0) : (alpha[t] < C);
      if (in_up) m = std::max(m, grad);
      if (in_low) M = std::min(M, grad);
    }
    model.bias = 0.5 * (m + M);
  }

  double wsq = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) wsq += alpha[t] * y[t] * u[t];
  model.w_norm_sq = wsq;
  model.dual_objective = alpha.sum() - 0.5 * wsq;
  return model;
}

// f(x) = sum_j alpha_j y_j K(x, x_j) + b per evaluation row. The sign gives
// the predicted class (+1 bona fide); the raw score is kept for ROC work.
inline Eigen::VectorXd decision_scores(const TrainedSvm& model,
                                       const Eigen::MatrixXd& cross) {
  const Eigen::Index n = model.alphas.size();
  if (cross.cols() != n)
    throw DataError("decision_scores: cross-kernel columns do not match training rows");
  Eigen::VectorXd coef(n);
  for (Eigen::Index t = 0; t < n; ++t)
    coef[t] = model.alphas[t] * model.labels[static_cast<std::size_t>(t)];
  return (cross * coef).array() + model.bias;
}

// Geometric margin 2 / ||w||.
inline double margin(const TrainedSvm& model) {
  if (model.w_norm_sq <= 1e-15)
    throw InternalError("margin: degenerate separator (||w||^2 ~ 0)");
  return 2.0 / std::sqrt(model.w_norm_sq);
}

}  // namespace qksvm
