#pragma once

// Binary classification metrics: per-class precision/recall/F1, accuracy,
// confusion matrix, ROC sweep and trapezoidal AUC.
//
// Zero-denominator metrics are defined as 0 (and flagged) instead of
// raising, so degenerate folds cannot abort a grid search.

#include <array>
#include <cstdint>

#include "osteo/common.hpp"

namespace osteo::metrics {

struct ConfusionMatrix {
  // Positive class is label 1.
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::int64_t total() const { return tp + fp + fn + tn; }
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  ConfusionMatrix confusion;
  std::array<ClassMetrics, 2> per_class;
  double accuracy = 0.0;
  ClassMetrics macro;
  ClassMetrics weighted;
  bool zero_division = false;  // set when any denominator above was 0

  double auc = -1.0;  // filled by roc_and_auc when scores are available
};

inline MetricsReport compute_metrics(std::span<const int> y_true,
                                     std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    fail(ErrorKind::Input, "y_true and y_pred length mismatch");
  }
  if (y_true.empty()) fail(ErrorKind::Input, "empty input");

  MetricsReport r;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if (t == 1 && p == 1) r.confusion.tp++;
    else if (t == 0 && p == 1) r.confusion.fp++;
    else if (t == 1 && p == 0) r.confusion.fn++;
    else r.confusion.tn++;
  }

  auto safe_div = [&r](double num, double den) {
    if (den <= 0.0) {
      r.zero_division = true;
      return 0.0;
    }
    return num / den;
  };

  const auto& c = r.confusion;
  // Class 1: TP=tp, FP=fp, FN=fn. Class 0 swaps roles: TP=tn, FP=fn, FN=fp.
  const double cls_tp[2] = {static_cast<double>(c.tn), static_cast<double>(c.tp)};
  const double cls_fp[2] = {static_cast<double>(c.fn), static_cast<double>(c.fp)};
  const double cls_fn[2] = {static_cast<double>(c.fp), static_cast<double>(c.fn)};
  const double support[2] = {static_cast<double>(c.tn + c.fp),
                             static_cast<double>(c.tp + c.fn)};
  for (int k = 0; k < 2; ++k) {
    auto& m = r.per_class[static_cast<std::size_t>(k)];
    m.precision = safe_div(cls_tp[k], cls_tp[k] + cls_fp[k]);
    m.recall = safe_div(cls_tp[k], cls_tp[k] + cls_fn[k]);
    m.f1 = safe_div(2.0 * m.precision * m.recall, m.precision + m.recall);
  }
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());

  r.macro.precision = 0.5 * (r.per_class[0].precision + r.per_class[1].precision);
  r.macro.recall = 0.5 * (r.per_class[0].recall + r.per_class[1].recall);
  r.macro.f1 = 0.5 * (r.per_class[0].f1 + r.per_class[1].f1);

  const double n = static_cast<double>(c.total());
  r.weighted.precision =
      (support[0] * r.per_class[0].precision + support[1] * r.per_class[1].precision) / n;
  r.weighted.recall =
      (support[0] * r.per_class[0].recall + support[1] * r.per_class[1].recall) / n;
  r.weighted.f1 = (support[0] * r.per_class[0].f1 + support[1] * r.per_class[1].f1) / n;
  return r;
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// Threshold sweep over unique scores, descending; tied scores collapse into
// one point. The leading (0,0) point carries threshold max(score)+1. AUC is
// the trapezoidal integral of the curve.
inline RocCurve roc_and_auc(std::span<const int> y_true,
                            std::span<const double> scores) {
  if (y_true.size() != scores.size()) {
    fail(ErrorKind::Input, "labels and scores length mismatch");
  }
  if (y_true.empty()) fail(ErrorKind::Input, "empty input");
  std::int64_t pos = 0, neg = 0;
  for (int t : y_true) (t == 1 ? pos : neg)++;
  if (pos == 0 || neg == 0) {
    fail(ErrorKind::Input, "AUC undefined: both classes required");
  }

  std::vector<std::size_t> order(y_true.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  RocCurve out;
  out.points.push_back({0.0, 0.0, scores[order[0]] + 1.0});
  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (y_true[order[i]] == 1 ? tp : fp)++;
      ++i;
    }
    out.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos), s});
  }

  double auc = 0.0;
  for (std::size_t k = 1; k < out.points.size(); ++k) {
    const auto& a = out.points[k - 1];
    const auto& b = out.points[k];
    auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  out.auc = auc;
  return out;
}

}  // namespace osteo::metrics
