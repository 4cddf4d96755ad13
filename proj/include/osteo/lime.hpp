#pragma once

// Local surrogate explanations: perturb around an instance, weight samples
// by an exponential kernel on standardized distance, and fit a ridge
// regression of the predicted-class probability on the (standardized)
// perturbed features.
//
// Perturbation model, driven by training-set statistics:
//   continuous feature  - Gaussian noise with the feature's std deviation
//   categorical feature - resampled from the training category frequencies
// Distance uses standardized differences for continuous features and a 0/1
// mismatch indicator for categorical ones. No discretization.

#include <functional>

#include "osteo/dataset.hpp"

namespace osteo::explain {

struct LimeConfig {
  int n_samples = 5000;
  double kernel_width = 0.0;   // <= 0 picks the default 0.75 * sqrt(M)
  double ridge_penalty = 1.0;
  int top_k = 10;
  std::uint64_t seed = 42;

  void validate() const {
    if (n_samples < 2) fail(ErrorKind::Config, "n_samples must be >= 2");
    if (ridge_penalty <= 0.0) fail(ErrorKind::Config, "ridge_penalty must be > 0");
    if (top_k < 1) fail(ErrorKind::Config, "top_k must be >= 1");
  }
};

struct LimeExplanation {
  std::vector<double> instance;
  int predicted_class = 0;
  double predicted_probability = 0.0;
  // (feature index, signed weight), top-K by |weight| descending.
  std::vector<std::pair<std::size_t, double>> feature_weights;
  double intercept = 0.0;
  double surrogate_r2 = 0.0;
  LimeConfig config;
};

namespace detail {

// Cholesky solve of the symmetric positive definite system A x = b.
inline std::vector<double> solve_spd(std::vector<std::vector<double>> A,
                                     std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = A[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= A[i][k] * A[j][k];
      if (i == j) {
        if (s <= 0.0) fail(ErrorKind::Fit, "surrogate system not positive definite");
        A[i][i] = std::sqrt(s);
      } else {
        A[i][j] = s / A[j][j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= A[i][k] * b[k];
    b[i] = s / A[i][i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[k][i] * b[k];
    b[i] = s / A[i][i];
  }
  return b;
}

struct FeatureStats {
  double mean = 0.0;
  double sd = 1.0;
  bool categorical = false;
  std::vector<double> category_cdf;  // cumulative frequencies, categorical only
};

inline std::vector<FeatureStats> training_stats(const data::Dataset& d) {
  std::vector<FeatureStats> stats(d.feature_count);
  for (std::size_t j = 0; j < d.feature_count; ++j) {
    auto& st = stats[j];
    st.categorical = d.feature_kinds[j] != data::ColumnKind::Continuous;
    double s = 0.0;
    for (std::size_t i = 0; i < d.row_count; ++i) s += d.features[i * d.feature_count + j];
    st.mean = s / static_cast<double>(d.row_count);
    double ss = 0.0;
    for (std::size_t i = 0; i < d.row_count; ++i) {
      const double dv = d.features[i * d.feature_count + j] - st.mean;
      ss += dv * dv;
    }
    st.sd = std::sqrt(ss / static_cast<double>(d.row_count));
    if (st.categorical) {
      const std::size_t k = d.feature_categories[j].size();
      std::vector<double> freq(k, 0.0);
      for (std::size_t i = 0; i < d.row_count; ++i) {
        freq[static_cast<std::size_t>(d.features[i * d.feature_count + j])] += 1.0;
      }
      st.category_cdf.resize(k);
      double acc = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        acc += freq[c] / static_cast<double>(d.row_count);
        st.category_cdf[c] = acc;
      }
      st.category_cdf.back() = 1.0;
    }
  }
  return stats;
}

}  // namespace detail

using PredictFn = std::function<std::pair<double, double>(std::span<const double>)>;

inline LimeExplanation lime_explain(const PredictFn& predict, std::span<const double> x,
                                    const data::Dataset& background, LimeConfig cfg) {
  cfg.validate();
  const std::size_t M = background.feature_count;
  if (x.size() != M) fail(ErrorKind::Input, "instance width mismatch");
  if (cfg.kernel_width <= 0.0) {
    cfg.kernel_width = 0.75 * std::sqrt(static_cast<double>(M));
  }
  const auto stats = detail::training_stats(background);
  const auto n = static_cast<std::size_t>(cfg.n_samples);

  Rng rng(cfg.seed, 0x11e3);
  std::vector<double> Z(n * M);
  std::vector<double> weight(n), target(n);

  // Row 0 is the instance itself.
  std::copy(x.begin(), x.end(), Z.begin());
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < M; ++j) {
      const auto& st = stats[j];
      double v;
      if (st.categorical) {
        const double u = rng.uniform();
        std::size_t c = 0;
        while (c + 1 < st.category_cdf.size() && u > st.category_cdf[c]) ++c;
        v = static_cast<double>(c);
      } else {
        v = x[j] + st.sd * rng.normal();
      }
      Z[i * M + j] = v;
    }
  }

  const auto p_instance = predict(x);
  const int predicted_class = p_instance.second >= p_instance.first ? 1 : 0;

  double max_tail_weight = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      const auto& st = stats[j];
      double delta;
      if (st.categorical) {
        delta = Z[i * M + j] == x[j] ? 0.0 : 1.0;
      } else {
        delta = st.sd > 0.0 ? (Z[i * M + j] - x[j]) / st.sd : 0.0;
      }
      d2 += delta * delta;
    }
    weight[i] = std::exp(-d2 / (cfg.kernel_width * cfg.kernel_width));
    if (i > 0) max_tail_weight = std::max(max_tail_weight, weight[i]);

    const auto p = predict(std::span<const double>(&Z[i * M], M));
    target[i] = predicted_class == 1 ? p.second : p.first;
  }
  if (max_tail_weight < 1e-12) {
    fail(ErrorKind::KernelWidth,
         "all perturbed samples have ~zero kernel weight; increase kernel_width");
  }

  // Standardize the design by training stats, then solve the weighted ridge
  // normal equations with an unpenalized intercept (weighted centering).
  std::vector<double> zs(n * M);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < M; ++j) {
      const auto& st = stats[j];
      zs[i * M + j] = (Z[i * M + j] - st.mean) / (st.sd > 0.0 ? st.sd : 1.0);
    }
  }
  double wsum = 0.0;
  for (double w : weight) wsum += w;
  std::vector<double> zbar(M, 0.0);
  double ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < M; ++j) zbar[j] += weight[i] * zs[i * M + j];
    ybar += weight[i] * target[i];
  }
  for (auto& v : zbar) v /= wsum;
  ybar /= wsum;

  std::vector<std::vector<double>> A(M, std::vector<double>(M, 0.0));
  std::vector<double> rhs(M, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weight[i];
    const double yc = target[i] - ybar;
    for (std::size_t a = 0; a < M; ++a) {
      const double za = zs[i * M + a] - zbar[a];
      rhs[a] += w * za * yc;
      for (std::size_t b = a; b < M; ++b) {
        A[a][b] += w * za * (zs[i * M + b] - zbar[b]);
      }
    }
  }
  for (std::size_t a = 0; a < M; ++a) {
    for (std::size_t b = 0; b < a; ++b) A[a][b] = A[b][a];
    A[a][a] += cfg.ridge_penalty;
  }
  const auto beta = detail::solve_spd(A, rhs);

  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = ybar;
    for (std::size_t j = 0; j < M; ++j) pred += beta[j] * (zs[i * M + j] - zbar[j]);
    ss_res += weight[i] * (target[i] - pred) * (target[i] - pred);
    ss_tot += weight[i] * (target[i] - ybar) * (target[i] - ybar);
  }

  LimeExplanation out;
  out.instance.assign(x.begin(), x.end());
  out.predicted_class = predicted_class;
  out.predicted_probability = predicted_class == 1 ? p_instance.second : p_instance.first;
  out.intercept = ybar;
  for (std::size_t j = 0; j < M; ++j) out.intercept -= beta[j] * zbar[j];
  out.surrogate_r2 = ss_tot > 1e-30 ? 1.0 - ss_res / ss_tot : 1.0;
  out.config = cfg;

  std::vector<std::size_t> order(M);
  for (std::size_t j = 0; j < M; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = std::abs(beta[a]), vb = std::abs(beta[b]);
    if (va != vb) return va > vb;
    return a < b;
  });
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(cfg.top_k), M);
  for (std::size_t k = 0; k < keep; ++k) {
    out.feature_weights.emplace_back(order[k], beta[order[k]]);
  }
  return out;
}

}  // namespace osteo::explain
