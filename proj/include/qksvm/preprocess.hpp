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
#include <Eigen/SVD>
#include <cmath>

#include "qksvm/common.hpp"
#include "qksvm/digest.hpp"

namespace qksvm {

// Per-feature min-max statistics, fitted on the training split only.
struct ScalerParams {
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  void update_digest(Sha256& h) const {
    h.update_u64(static_cast<std::uint64_t>(min.size()));
    for (Eigen::Index i = 0; i < min.size(); ++i) h.update_double(min[i]);
    for (Eigen::Index i = 0; i < max.size(); ++i) h.update_double(max[i]);
  }
};

inline ScalerParams fit_minmax(const Eigen::MatrixXd& train) {
  if (train.rows() < 2)
    throw DataError("fit_minmax: need at least 2 training rows");
  ScalerParams p;
  p.min = train.colwise().minCoeff();
  p.max = train.colwise().maxCoeff();
  return p;
}

// (x - min) / (max - min) per column; constant training columns map to 0 and
// outputs are clamped to [0, 1] (evaluation rows may exceed the training
// range).
inline Eigen::MatrixXd apply_minmax(const Eigen::MatrixXd& x, const ScalerParams& p) {
  if (x.cols() != p.min.size())
    throw DataError("apply_minmax: column count does not match scaler");
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double range = p.max[j] - p.min[j];
    if (range <= 0.0) {
      out.col(j).setZero();
      continue;
    }
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double v = (x(i, j) - p.min[j]) / range;
      out(i, j) = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
  }
  return out;
}

// PCA model from the SVD of the centered training matrix. components holds
// orthonormal rows (d x D); explained_variance is descending, n-1 normalized.
struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;
  Eigen::VectorXd explained_variance;

  void update_digest(Sha256& h) const {
    h.update_u64(static_cast<std::uint64_t>(components.rows()));
    h.update_u64(static_cast<std::uint64_t>(components.cols()));
    for (Eigen::Index i = 0; i < mean.size(); ++i) h.update_double(mean[i]);
    for (Eigen::Index r = 0; r < components.rows(); ++r)
      for (Eigen::Index c = 0; c < components.cols(); ++c)
        h.update_double(components(r, c));
  }
};

// Fits a d-dimensional PCA. Sign convention: each component's
// largest-magnitude entry is positive (earliest index on ties). Inputs whose
// centered rank is below d are rejected rather than silently padded.
inline PcaModel fit_pca(const Eigen::MatrixXd& train, int d) {
  const Eigen::Index n = train.rows(), dim = train.cols();
  if (d < 1) throw ConfigError("fit_pca: target dimension must be >= 1");
  if (d > std::min<Eigen::Index>(n - 1, dim))
    throw DataError("fit_pca: target dimension " + std::to_string(d) +
                    " exceeds min(rows-1, cols)");
  PcaModel m;
  m.mean = train.colwise().mean();
  Eigen::MatrixXd centered = train.rowwise() - m.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double rank_tol =
      sv.size() > 0 ? sv[0] * 1e-12 * std::max<double>(static_cast<double>(n),
                                                       static_cast<double>(dim))
                    : 0.0;
  if (sv.size() < d || sv[d - 1] <= rank_tol)
    throw DataError("fit_pca: input rank below requested dimension " + std::to_string(d));

  m.components = svd.matrixV().leftCols(d).transpose();
  m.explained_variance.resize(d);
  for (int i = 0; i < d; ++i)
    m.explained_variance[i] = sv[i] * sv[i] / static_cast<double>(n - 1);
  for (int i = 0; i < d; ++i) {
    Eigen::Index arg = 0;
    double best = 0.0;
    for (Eigen::Index j = 0; j < m.components.cols(); ++j) {
      double a = std::abs(m.components(i, j));
      if (a > best) {
        best = a;
        arg = j;
      }
    }
    if (m.components(i, arg) < 0.0) m.components.row(i) = -m.components.row(i);
  }
  return m;
}

inline Eigen::MatrixXd apply_pca(const Eigen::MatrixXd& x, const PcaModel& m) {
  if (x.cols() != m.mean.size())
    throw DataError("apply_pca: column count does not match model");
  return (x.rowwise() - m.mean.transpose()) * m.components.transpose();
}

}  // namespace qksvm
