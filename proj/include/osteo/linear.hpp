#pragma once

// L1-regularized logistic regression solved by proximal gradient with
// backtracking line search.
//
// Objective (liblinear convention, penalty coefficient 1, data term scaled
// by C):
//
//     F(w, b) = ||w||_1 + C * sum_i log(1 + exp(-y~_i (w.x~_i + b)))
//
// with y~ in {-1,+1}, features standardized internally (zero-variance
// columns get scale 1 and keep weight exactly 0) and the intercept
// unpenalized. Each accepted step is required to not increase F, so the
// objective trace is monotone by construction.

#include "osteo/common.hpp"

namespace osteo::linear {

struct LogisticModel {
  std::vector<double> weights;   // standardized space
  double intercept = 0.0;
  std::vector<double> means;
  std::vector<double> scales;
  bool converged = false;

  double margin(std::span<const double> x) const {
    double m = intercept;
    for (std::size_t j = 0; j < weights.size(); ++j) {
      m += weights[j] * (x[j] - means[j]) / scales[j];
    }
    return m;
  }

  std::pair<double, double> predict_proba(std::span<const double> x) const {
    if (x.size() != weights.size()) {
      fail(ErrorKind::Prediction, "feature width mismatch");
    }
    for (double v : x) {
      if (!std::isfinite(v)) fail(ErrorKind::Prediction, "non-finite feature value");
    }
    const double p1 = 1.0 / (1.0 + std::exp(-margin(x)));
    return {1.0 - p1, p1};
  }
};

namespace detail {

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// log(1 + exp(z)) without overflow.
inline double log1pexp(double z) {
  if (z > 35.0) return z;
  if (z < -35.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

}  // namespace detail

inline LogisticModel fit_logistic_l1(MatrixView X, std::span<const int> y, double C,
                                     double tol = 1e-6, int max_iter = 10000,
                                     std::vector<double>* objective_trace = nullptr) {
  if (C <= 0.0) fail(ErrorKind::Config, "C must be > 0");
  if (tol <= 0.0) fail(ErrorKind::Config, "tol must be > 0");
  if (max_iter < 1) fail(ErrorKind::Config, "max_iter must be >= 1");
  if (X.rows == 0 || y.size() != X.rows) fail(ErrorKind::Fit, "empty or mismatched input");

  const std::size_t n = X.rows, m = X.cols;
  LogisticModel model;
  model.means.assign(m, 0.0);
  model.scales.assign(m, 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += X.at(i, j);
    model.means[j] = s / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dv = X.at(i, j) - model.means[j];
      ss += dv * dv;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    model.scales[j] = sd > 0.0 ? sd : 1.0;
  }

  // Standardized copy; zero-variance columns become identically 0.
  std::vector<double> Z(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      Z[i * m + j] = (X.at(i, j) - model.means[j]) / model.scales[j];
    }
  }
  std::vector<double> sy(n);
  for (std::size_t i = 0; i < n; ++i) sy[i] = y[i] == 1 ? 1.0 : -1.0;

  std::vector<double> w(m, 0.0);
  double b = 0.0;

  std::vector<double> margins(n, 0.0);
  auto compute_margins = [&](const std::vector<double>& wv, double bv,
                             std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = bv;
      const double* zi = &Z[i * m];
      for (std::size_t j = 0; j < m; ++j) s += wv[j] * zi[j];
      out[i] = s;
    }
  };
  auto smooth_loss = [&](const std::vector<double>& mg) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += detail::log1pexp(-sy[i] * mg[i]);
    return C * s;
  };
  auto l1_norm = [&](const std::vector<double>& wv) {
    double s = 0.0;
    for (double v : wv) s += std::abs(v);
    return s;
  };

  compute_margins(w, b, margins);
  double f = smooth_loss(margins);
  double F = f + l1_norm(w);
  if (objective_trace) objective_trace->push_back(F);

  std::vector<double> grad_w(m), w_next(m), margins_next(n);
  double step = 1.0;
  const double step_min = 1e-16;

  for (int iter = 0; iter < max_iter; ++iter) {
    // grad of the smooth part: C * sum_i sigma(-y m) * (-y z_i)
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sig = 1.0 / (1.0 + std::exp(sy[i] * margins[i]));
      const double coef = C * -sy[i] * sig;
      const double* zi = &Z[i * m];
      for (std::size_t j = 0; j < m; ++j) grad_w[j] += coef * zi[j];
      grad_b += coef;
    }

    double max_update = 0.0, f_next = 0.0, F_next = 0.0, b_next = 0.0;
    for (;;) {
      for (std::size_t j = 0; j < m; ++j) {
        w_next[j] = detail::soft_threshold(w[j] - step * grad_w[j], step);
      }
      b_next = b - step * grad_b;
      compute_margins(w_next, b_next, margins_next);
      f_next = smooth_loss(margins_next);

      double quad = f, diff_sq = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double dj = w_next[j] - w[j];
        quad += grad_w[j] * dj;
        diff_sq += dj * dj;
      }
      const double db = b_next - b;
      quad += grad_b * db;
      diff_sq += db * db;
      quad += diff_sq / (2.0 * step);

      F_next = f_next + l1_norm(w_next);
      if ((f_next <= quad && F_next <= F) || step <= step_min) break;
      step *= 0.5;
    }

    for (std::size_t j = 0; j < m; ++j) {
      max_update = std::max(max_update, std::abs(w_next[j] - w[j]));
    }
    max_update = std::max(max_update, std::abs(b_next - b));

    if (F_next <= F) {
      w.swap(w_next);
      b = b_next;
      margins.swap(margins_next);
      f = f_next;
      F = F_next;
    } else {
      max_update = 0.0;  // no acceptable step left; treat as converged
    }
    if (objective_trace) objective_trace->push_back(F);

    if (max_update < tol) {
      model.converged = true;
      break;
    }
    step = std::min(step * 2.0, 1e12);
  }

  model.weights = std::move(w);
  model.intercept = b;
  return model;
}

}  // namespace osteo::linear
