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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qksvm/common.hpp"

namespace qksvm {

// Metric conventions: spoof is the positive class. Decision scores are
// bona-fide oriented (f > 0 predicts bona fide), matching the label
// convention +1 bona fide / -1 spoof; metric code flips to spoof scores
// internally and never auto-corrects orientation.

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

struct BasicMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fpr = 0.0;
  ConfusionCounts counts;
};

// Threshold semantics: predict spoof iff score < threshold (headline numbers
// use threshold 0, i.e. the sign of the SVM score; exact zeros count as bona
// fide). FPR is computed over bona fide trials.
inline BasicMetrics confusion_metrics(const std::vector<double>& scores,
                                      const std::vector<int>& labels,
                                      double threshold = 0.0) {
  if (scores.size() != labels.size())
    throw DataError("confusion_metrics: score/label length mismatch");
  if (scores.empty()) throw DataError("confusion_metrics: empty input");
  BasicMetrics m;
  long n_spoof = 0, n_bona = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool is_spoof = labels[i] == -1;
    const bool predicted_spoof = scores[i] < threshold;
    (is_spoof ? n_spoof : n_bona)++;
    if (is_spoof && predicted_spoof) m.counts.tp++;
    else if (is_spoof && !predicted_spoof) m.counts.fn++;
    else if (!is_spoof && predicted_spoof) m.counts.fp++;
    else m.counts.tn++;
  }
  if (n_spoof == 0 || n_bona == 0)
    throw DataError("confusion_metrics: both classes required in the evaluation split");
  const double total = static_cast<double>(scores.size());
  m.accuracy = static_cast<double>(m.counts.tp + m.counts.tn) / total;
  const long predicted_pos = m.counts.tp + m.counts.fp;
  m.precision = predicted_pos > 0
                    ? static_cast<double>(m.counts.tp) / static_cast<double>(predicted_pos)
                    : 0.0;
  m.recall = static_cast<double>(m.counts.tp) / static_cast<double>(n_spoof);
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.fpr = static_cast<double>(m.counts.fp) / static_cast<double>(n_bona);
  return m;
}

struct RocPoint {
  double threshold;  // spoof-score threshold (predict spoof iff -f > threshold)
  double fpr;
  double tpr;
  double fnr;
};

struct RocCurve {
  std::vector<RocPoint> points;  // ordered by increasing FPR
};

// Sweeps every operating point of the spoof-score staircase: thresholds at
// midpoints between distinct sorted scores plus +-infinity, so tied scores
// share one point. EER is the linear interpolation of the (FPR, FNR) polyline
// where FPR - FNR changes sign.
inline std::pair<RocCurve, double> roc_and_eer(const std::vector<double>& scores,
                                               const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw DataError("roc_and_eer: score/label length mismatch");
  std::vector<double> spoof_scores, bona_scores;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == -1) spoof_scores.push_back(-scores[i]);
    else if (labels[i] == 1) bona_scores.push_back(-scores[i]);
    else throw DataError("roc_and_eer: labels must be +1 or -1");
  }
  if (spoof_scores.empty() || bona_scores.empty())
    throw DataError("roc_and_eer: both classes required");

  std::vector<double> all;
  all.reserve(scores.size());
  all.insert(all.end(), spoof_scores.begin(), spoof_scores.end());
  all.insert(all.end(), bona_scores.begin(), bona_scores.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  std::vector<double> thresholds;
  thresholds.push_back(std::numeric_limits<double>::infinity());
  for (std::size_t i = all.size(); i-- > 1;)
    thresholds.push_back(0.5 * (all[i - 1] + all[i]));
  thresholds.push_back(-std::numeric_limits<double>::infinity());

  const double n_spoof = static_cast<double>(spoof_scores.size());
  const double n_bona = static_cast<double>(bona_scores.size());
  RocCurve curve;
  curve.points.reserve(thresholds.size());
  for (double t : thresholds) {
    long tp = 0, fp = 0;
    for (double s : spoof_scores)
      if (s > t) ++tp;
    for (double s : bona_scores)
      if (s > t) ++fp;
    RocPoint p;
    p.threshold = t;
    p.tpr = tp / n_spoof;
    p.fpr = fp / n_bona;
    p.fnr = 1.0 - p.tpr;
    curve.points.push_back(p);
  }

  double eer = 0.5;
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    const double diff = curve.points[k].fpr - curve.points[k].fnr;
    if (diff == 0.0) {
      eer = curve.points[k].fpr;
      break;
    }
    if (diff > 0.0) {
      if (k == 0) {
        eer = curve.points[k].fpr;
        break;
      }
      const RocPoint& a = curve.points[k - 1];
      const RocPoint& b = curve.points[k];
      const double denom = (b.fpr - a.fpr) - (b.fnr - a.fnr);
      const double t = denom != 0.0 ? (a.fnr - a.fpr) / denom : 0.0;
      eer = a.fpr + t * (b.fpr - a.fpr);
      break;
    }
  }
  return {curve, eer};
}

inline double roc_auc(const RocCurve& curve) {
  double auc = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const RocPoint& a = curve.points[k - 1];
    const RocPoint& b = curve.points[k];
    auc += 0.5 * (b.fpr - a.fpr) * (a.tpr + b.tpr);
  }
  return auc;
}

}  // namespace qksvm
