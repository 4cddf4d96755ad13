#pragma once

// Permutation feature importance: the drop in a score when one feature
// column is shuffled, averaged over repeats. Each (feature, repeat) task
// draws from its own seeded stream, so results do not depend on worker
// count.

#include "osteo/ensemble.hpp"
#include "osteo/metrics.hpp"

namespace osteo::explain {

struct PfiReport {
  std::vector<double> mean_importance;  // per feature: baseline - permuted, averaged
  std::vector<double> std_importance;   // population std over repeats
  double baseline_score = 0.0;
  std::string metric;
  int n_repeats = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> ranking;     // features by mean importance, descending
};

namespace detail {

inline double score_dataset(const ensemble::Model& m, const data::Dataset& d,
                            const std::string& metric,
                            const std::vector<double>* column_override = nullptr,
                            std::size_t override_feature = 0) {
  std::vector<double> scores(d.row_count);
  std::vector<int> preds(d.row_count);
  std::vector<double> row_buf(d.feature_count);
  for (std::size_t i = 0; i < d.row_count; ++i) {
    std::span<const double> row = d.row(i);
    if (column_override) {
      std::copy(row.begin(), row.end(), row_buf.begin());
      row_buf[override_feature] = (*column_override)[i];
      row = row_buf;
    }
    const auto p = m.predict_proba(row);
    scores[i] = p.second;
    preds[i] = p.second >= 0.5 ? 1 : 0;
  }
  if (metric == "accuracy") {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < d.row_count; ++i) {
      correct += preds[i] == d.labels[i] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(d.row_count);
  }
  if (metric == "auc") {
    return metrics::roc_and_auc(d.labels, scores).auc;
  }
  fail(ErrorKind::Config, "unknown metric '" + metric + "' (use accuracy or auc)");
}

}  // namespace detail

inline PfiReport permutation_importance(const ensemble::Model& m, const data::Dataset& d,
                                        const std::string& metric, int n_repeats,
                                        std::uint64_t seed) {
  if (n_repeats < 1) fail(ErrorKind::Config, "n_repeats must be >= 1");
  m.check_schema(d);

  PfiReport out;
  out.metric = metric;
  out.n_repeats = n_repeats;
  out.seed = seed;
  out.baseline_score = detail::score_dataset(m, d, metric);

  const std::size_t M = d.feature_count;
  const auto R = static_cast<std::size_t>(n_repeats);
  std::vector<double> drops(M * R, 0.0);
  parallel_for(M * R, [&](std::size_t task) {
    const std::size_t f = task / R;
    const std::size_t r = task % R;
    std::vector<double> column(d.row_count);
    for (std::size_t i = 0; i < d.row_count; ++i) {
      column[i] = d.features[i * d.feature_count + f];
    }
    Rng rng(seed, mix64(0x9f1, f, r));
    rng.shuffle(column);
    drops[task] = out.baseline_score - detail::score_dataset(m, d, metric, &column, f);
  });

  out.mean_importance.assign(M, 0.0);
  out.std_importance.assign(M, 0.0);
  for (std::size_t f = 0; f < M; ++f) {
    double s = 0.0;
    for (std::size_t r = 0; r < R; ++r) s += drops[f * R + r];
    const double mean = s / static_cast<double>(R);
    double ss = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      ss += (drops[f * R + r] - mean) * (drops[f * R + r] - mean);
    }
    out.mean_importance[f] = mean;
    out.std_importance[f] = std::sqrt(ss / static_cast<double>(R));
  }
  out.ranking.resize(M);
  for (std::size_t f = 0; f < M; ++f) out.ranking[f] = f;
  std::sort(out.ranking.begin(), out.ranking.end(), [&](std::size_t a, std::size_t b) {
    if (out.mean_importance[a] != out.mean_importance[b]) {
      return out.mean_importance[a] > out.mean_importance[b];
    }
    return a < b;
  });
  return out;
}

}  // namespace osteo::explain
