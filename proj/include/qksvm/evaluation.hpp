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
#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "qksvm/common.hpp"
#include "qksvm/config.hpp"
#include "qksvm/dataset.hpp"
#include "qksvm/diagnostics.hpp"
#include "qksvm/folds.hpp"
#include "qksvm/kernels.hpp"
#include "qksvm/metrics.hpp"
#include "qksvm/preprocess.hpp"
#include "qksvm/stats.hpp"
#include "qksvm/svm.hpp"

namespace qksvm {

// Matched kernel-swap protocol: shared stratified folds, per-fold scaler+PCA
// fitted on the training split only, per-model inner 3-fold hyperparameter
// selection, and a digest assertion that everything upstream of the Gram
// matrix is identical across models.

struct HyperChoice {
  KernelSpec kernel;  // the winning grid point, fully pinned
  double C = 1.0;
  double inner_eer = 0.0;  // mean inner-fold EER of the winner
};

struct SolverReport {
  bool converged = false;
  long iterations = 0;
  double final_violation = 0.0;
};

struct FoldOutcome {
  int fold = 0;
  BasicMetrics basic;
  double eer = 0.0;
  double margin = 0.0;
  RocCurve roc;
  std::vector<double> scores;      // raw decision scores on the eval split
  std::vector<int> eval_labels;
  std::vector<std::string> eval_ids;
  HyperChoice chosen;
  SolverReport solver;
  double psd_lambda_min = 0.0;
  double psd_shift = 0.0;
  Digest preprocess_digest{};
  // Model record (serialized into the run directory).
  Eigen::VectorXd alphas;
  double bias = 0.0;
  double w_norm_sq = 0.0;
  std::vector<int> support_indices;
  std::vector<int> train_labels;
  std::vector<std::string> train_ids;
};

struct FoldScalarMetrics {
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0, fpr = 0.0;
  double eer = 0.0, margin = 0.0;
};

struct ModelAggregate {
  double acc_mean = 0, acc_std = 0;
  double precision_mean = 0, precision_std = 0;
  double recall_mean = 0, recall_std = 0;
  double f1_mean = 0, f1_std = 0;
  double fpr_mean = 0, fpr_std = 0;
  double eer_mean = 0, eer_std = 0;      // headline: mean of per-fold EERs
  double margin_mean = 0, margin_std = 0;
  double eer_pooled = 0;                 // EER over all folds' scores pooled
};

inline ModelAggregate aggregate_folds(const std::vector<FoldScalarMetrics>& folds,
                                      const std::vector<double>& pooled_scores,
                                      const std::vector<int>& pooled_labels) {
  if (folds.empty()) throw InternalError("aggregate_folds: no folds");
  auto collect = [&](auto proj) {
    std::vector<double> v(folds.size());
    for (std::size_t i = 0; i < folds.size(); ++i) v[i] = proj(folds[i]);
    return v;
  };
  ModelAggregate a;
  auto set = [](const std::vector<double>& v, double& m, double& s) {
    m = mean(v);
    s = sample_std(v);
  };
  set(collect([](const auto& f) { return f.accuracy; }), a.acc_mean, a.acc_std);
  set(collect([](const auto& f) { return f.precision; }), a.precision_mean,
      a.precision_std);
  set(collect([](const auto& f) { return f.recall; }), a.recall_mean, a.recall_std);
  set(collect([](const auto& f) { return f.f1; }), a.f1_mean, a.f1_std);
  set(collect([](const auto& f) { return f.fpr; }), a.fpr_mean, a.fpr_std);
  set(collect([](const auto& f) { return f.eer; }), a.eer_mean, a.eer_std);
  set(collect([](const auto& f) { return f.margin; }), a.margin_mean, a.margin_std);
  a.eer_pooled = roc_and_eer(pooled_scores, pooled_labels).second;
  return a;
}

struct ModelRunResult {
  std::string name;
  KernelKind kind = KernelKind::kRbf;
  std::vector<FoldOutcome> folds;
  ModelAggregate agg;

  std::vector<FoldScalarMetrics> scalar_metrics() const {
    std::vector<FoldScalarMetrics> out(folds.size());
    for (std::size_t i = 0; i < folds.size(); ++i) {
      const auto& f = folds[i];
      out[i] = {f.basic.accuracy, f.basic.precision, f.basic.recall,
                f.basic.f1,       f.basic.fpr,       f.eer,
                f.margin};
    }
    return out;
  }
  std::vector<double> eer_folds() const {
    std::vector<double> v(folds.size());
    for (std::size_t i = 0; i < folds.size(); ++i) v[i] = folds[i].eer;
    return v;
  }
};

struct ModelDiagnostics {
  std::string name;
  double margin_mean = 0, margin_std = 0;
  double sigma_acc = 0, sigma_acc_z = 0;
  double separability = 0, security = 0, robustness = 0;
};

struct PairComparison {
  std::string model_a, model_b;
  double delta_eer = 0;  // mean EER a minus b
  double delta_fpr = 0;
  MetricComparison eer_stats;  // Welch t / p / Cohen's d on per-fold EERs
};

struct RunSummary {
  std::string dataset_name;
  std::string config_canonical;
  Digest config_digest{};
  FoldPlan plan;
  Digest fold_digest{};
  Digest features_params_digest{};
  Digest features_source_digest{};
  std::vector<ModelRunResult> models;
  std::vector<ModelDiagnostics> diagnostics;
  std::vector<PairComparison> comparisons;
};

namespace detail {

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

inline Eigen::MatrixXd take_block(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                                  const std::vector<int>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(rows[i], cols[j]);
  return out;
}

template <typename T>
inline std::vector<T> take(const std::vector<T>& v, const std::vector<int>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(v[static_cast<std::size_t>(i)]);
  return out;
}

inline void update_matrix_digest(Sha256& h, const Eigen::MatrixXd& m) {
  h.update_u64(static_cast<std::uint64_t>(m.rows()));
  h.update_u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) h.update_double(m(i, j));
}

}  // namespace detail

inline std::vector<ModelDiagnostics> compute_diagnostics(
    const std::vector<ModelRunResult>& models, double lambda) {
  std::vector<double> sigmas;
  for (const auto& m : models) sigmas.push_back(m.agg.acc_std);
  const std::vector<double> z = z_scores(sigmas);
  std::vector<ModelDiagnostics> out;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& a = models[i].agg;
    ModelDiagnostics d;
    d.name = models[i].name;
    d.margin_mean = a.margin_mean;
    d.margin_std = a.margin_std;
    d.sigma_acc = a.acc_std;
    d.sigma_acc_z = z[i];
    d.separability = sep_score(a.margin_mean, a.acc_mean, a.fpr_mean);
    d.security = sec_score(a.acc_mean, a.margin_mean, z[i]);
    d.robustness = robustness_index(a.margin_mean, a.margin_std, lambda);
    out.push_back(d);
  }
  return out;
}

inline std::vector<PairComparison> compute_comparisons(
    const std::vector<ModelRunResult>& models) {
  std::vector<PairComparison> out;
  for (std::size_t i = 0; i < models.size(); ++i)
    for (std::size_t j = i + 1; j < models.size(); ++j) {
      PairComparison c;
      c.model_a = models[i].name;
      c.model_b = models[j].name;
      c.delta_eer = models[i].agg.eer_mean - models[j].agg.eer_mean;
      c.delta_fpr = models[i].agg.fpr_mean - models[j].agg.fpr_mean;
      c.eer_stats = compare_models(models[i].eer_folds(), models[j].eer_folds());
      out.push_back(c);
    }
  return out;
}

inline RunSummary run_protocol(const FeatureArtifact& data, const RunConfig& cfg,
                               const GramCache* cache = nullptr) {
  cfg.validate();
  if (cfg.models.empty()) throw ConfigError("run: no models configured");
  bool any_classical = false, any_quantum = false;
  for (const auto& m : cfg.models)
    (m.kind == KernelKind::kQuantum ? any_quantum : any_classical) = true;
  if (!any_classical || !any_quantum)
    throw ConfigError(
        "run: the kernel-swap protocol needs at least one classical and one "
        "quantum model");
  if (data.rows.empty()) throw DataError("run: empty feature artifact");

  const std::vector<int> labels = data.labels();
  const std::vector<std::string> ids = data.ids();
  const int k = cfg.folds.k;
  const FoldPlan plan = stratified_kfold(labels, k, cfg.folds.seed);

  RunSummary summary;
  summary.dataset_name = cfg.dataset_name;
  summary.config_canonical = cfg.canonical_encoding();
  summary.config_digest = cfg.digest();
  summary.plan = plan;
  summary.fold_digest = plan.digest();
  summary.features_params_digest = data.params_digest;
  summary.features_source_digest = data.source_digest;
  summary.models.resize(cfg.models.size());
  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
    summary.models[mi].name = cfg.models[mi].name;
    summary.models[mi].kind = cfg.models[mi].kind;
    summary.models[mi].folds.resize(k);
  }

  constexpr int kGramTile = 64;
  constexpr double kPsdTol = 1e-8;
  constexpr int kInnerFolds = 3;

  for (int fold = 0; fold < k; ++fold) {
    const std::vector<int> train_idx = plan.train_indices(fold);
    const std::vector<int> eval_idx = plan.eval_indices(fold);
    const std::vector<int> y_tr = detail::take(labels, train_idx);
    const std::vector<int> y_ev = detail::take(labels, eval_idx);
    const std::vector<std::string> ids_tr = detail::take(ids, train_idx);
    const std::vector<std::string> ids_ev = detail::take(ids, eval_idx);

    // Fold-specific preprocessing, fitted on the training split only.
    const Eigen::MatrixXd x_tr_raw = detail::take_rows(data.values, train_idx);
    const Eigen::MatrixXd x_ev_raw = detail::take_rows(data.values, eval_idx);
    const ScalerParams scaler = fit_minmax(x_tr_raw);
    const Eigen::MatrixXd x_tr_scaled = apply_minmax(x_tr_raw, scaler);
    const Eigen::MatrixXd x_ev_scaled = apply_minmax(x_ev_raw, scaler);
    const PcaModel pca = fit_pca(x_tr_scaled, cfg.features.pca_dim);
    const Eigen::MatrixXd z_tr = apply_pca(x_tr_scaled, pca);
    const Eigen::MatrixXd z_ev = apply_pca(x_ev_scaled, pca);

    // Kernel-swap contract: digest everything upstream of the Gram matrix,
    // then fold in each model's effective feature parameterization. All
    // models must agree bit for bit.
    Sha256 shared;
    shared.update(to_hex(plan.digest()));
    shared.update_u64(static_cast<std::uint64_t>(fold));
    for (const auto& id : ids_tr) { shared.update(id); shared.update("\n"); }
    for (const auto& id : ids_ev) { shared.update(id); shared.update("\n"); }
    scaler.update_digest(shared);
    pca.update_digest(shared);
    detail::update_matrix_digest(shared, z_tr);
    detail::update_matrix_digest(shared, z_ev);
    const std::string shared_hex = to_hex(shared.finish());

    std::vector<Digest> contract(cfg.models.size());
    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
      Sha256 h;
      h.update(shared_hex);
      h.update(cfg.features.canonical_with_seed(cfg.models[mi].feature_seed));
      contract[mi] = h.finish();
    }
    for (std::size_t mi = 1; mi < cfg.models.size(); ++mi)
      if (contract[mi] != contract[0])
        throw InternalError(
            "kernel-swap contract violated in fold " + std::to_string(fold) +
            ": preprocessing digest of model '" + cfg.models[mi].name +
            "' differs from '" + cfg.models[0].name + "'");

    const FoldPlan inner_plan = stratified_kfold(
        y_tr, kInnerFolds, mix_seed(cfg.folds.seed, 1000 + static_cast<std::uint64_t>(fold)));

    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
      const ModelConfig& model_cfg = cfg.models[mi];
      const std::string context = cfg.features.canonical();
      const std::vector<KernelSpec> grid = model_cfg.kernel_grid(context);

      // Inner 3-fold selection over (kernel grid point, C), training data only.
      double best_eer = std::numeric_limits<double>::infinity();
      std::size_t best_g = 0;
      double best_c = model_cfg.c_grid.front();
      std::vector<PsdResult> psd(grid.size());
      for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        GramMatrix g = build_gram(z_tr, ids_tr, grid[gi], kGramTile, cache, cfg.jobs);
        psd[gi] = psd_floor(std::move(g), kPsdTol);
        for (double c : model_cfg.c_grid) {
          double eer_sum = 0.0;
          for (int inner = 0; inner < kInnerFolds; ++inner) {
            const std::vector<int> itr = inner_plan.train_indices(inner);
            const std::vector<int> iev = inner_plan.eval_indices(inner);
            GramMatrix sub;
            sub.values = detail::take_block(psd[gi].gram.values, itr, itr);
            SolverConfig sc;
            sc.C = c;
            sc.kkt_tol = model_cfg.kkt_tol;
            sc.max_passes = model_cfg.max_passes;
            sc.seed = model_cfg.feature_seed;
            const TrainedSvm svm = train(sub, detail::take(y_tr, itr), sc);
            const Eigen::MatrixXd cross =
                detail::take_block(psd[gi].gram.values, iev, itr);
            const Eigen::VectorXd s = decision_scores(svm, cross);
            const std::vector<double> sv(s.data(), s.data() + s.size());
            eer_sum += roc_and_eer(sv, detail::take(y_tr, iev)).second;
          }
          const double eer_mean = eer_sum / kInnerFolds;
          if (eer_mean < best_eer) {
            best_eer = eer_mean;
            best_g = gi;
            best_c = c;
          }
        }
      }

      // Final training on the full outer-training split.
      SolverConfig sc;
      sc.C = best_c;
      sc.kkt_tol = model_cfg.kkt_tol;
      sc.max_passes = model_cfg.max_passes;
      sc.seed = model_cfg.feature_seed;
      const TrainedSvm svm = train(psd[best_g].gram, y_tr, sc);
      const Eigen::MatrixXd cross = cross_gram(z_ev, z_tr, grid[best_g], cfg.jobs);
      const Eigen::VectorXd s = decision_scores(svm, cross);

      FoldOutcome out;
      out.fold = fold;
      out.scores.assign(s.data(), s.data() + s.size());
      out.eval_labels = y_ev;
      out.eval_ids = ids_ev;
      out.basic = confusion_metrics(out.scores, y_ev, 0.0);
      auto [roc, eer] = roc_and_eer(out.scores, y_ev);
      out.roc = std::move(roc);
      out.eer = eer;
      try {
        out.margin = margin(svm);
      } catch (const InternalError& e) {
        throw InternalError(std::string(e.what()) + " (model '" + model_cfg.name +
                            "', fold " + std::to_string(fold) + ")");
      }
      out.chosen.kernel = grid[best_g];
      out.chosen.C = best_c;
      out.chosen.inner_eer = best_eer;
      out.solver = {svm.converged, svm.iterations, svm.final_violation};
      out.psd_lambda_min = psd[best_g].lambda_min;
      out.psd_shift = psd[best_g].shift;
      out.preprocess_digest = contract[mi];
      out.alphas = svm.alphas;
      out.bias = svm.bias;
      out.w_norm_sq = svm.w_norm_sq;
      out.support_indices = svm.support_indices;
      out.train_labels = y_tr;
      out.train_ids = ids_tr;
      summary.models[mi].folds[static_cast<std::size_t>(fold)] = std::move(out);
    }
  }

  for (auto& m : summary.models) {
    std::vector<double> pooled_scores;
    std::vector<int> pooled_labels;
    for (const auto& f : m.folds) {
      pooled_scores.insert(pooled_scores.end(), f.scores.begin(), f.scores.end());
      pooled_labels.insert(pooled_labels.end(), f.eval_labels.begin(),
                           f.eval_labels.end());
    }
    m.agg = aggregate_folds(m.scalar_metrics(), pooled_scores, pooled_labels);
  }
  summary.diagnostics = compute_diagnostics(summary.models, cfg.diagnostics_lambda);
  summary.comparisons = compute_comparisons(summary.models);
  return summary;
}

}  // namespace qksvm
