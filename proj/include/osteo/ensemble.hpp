#pragma once

// The model families behind one prediction interface: random forest,
// first-order gradient boosting, second-order (xgb-style) boosting,
// leaf-wise (lgbm-style) boosting, SAMME AdaBoost, and the L1 logistic
// model from linear.hpp.
//
// Boosted families work in margin space: probability = logistic(margin),
// margin = base_margin + sum_m tree_weight_m * scale_m * leaf_m(x). Leaf
// values are stored raw; shrinkage is applied at accumulation time so the
// serialized trees keep clean additive semantics.

#include <optional>

#include "osteo/dataset.hpp"
#include "osteo/linear.hpp"
#include "osteo/tree.hpp"

namespace osteo::ensemble {

enum class Family { RandomForest, GradientBoosting, Xgb, Lgbm, AdaBoost, Logistic };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::RandomForest: return "rf";
    case Family::GradientBoosting: return "gb";
    case Family::Xgb: return "xgb";
    case Family::Lgbm: return "lgbm";
    case Family::AdaBoost: return "ab";
    case Family::Logistic: return "lr";
  }
  return "?";
}

inline Family family_from_string(const std::string& s) {
  if (s == "rf") return Family::RandomForest;
  if (s == "gb") return Family::GradientBoosting;
  if (s == "xgb") return Family::Xgb;
  if (s == "lgbm") return Family::Lgbm;
  if (s == "ab") return Family::AdaBoost;
  if (s == "lr") return Family::Logistic;
  fail(ErrorKind::Config, "unknown model family '" + s + "'");
}

inline bool is_boosted(Family f) {
  return f == Family::GradientBoosting || f == Family::Xgb || f == Family::Lgbm;
}

inline double logistic_link(double margin) { return 1.0 / (1.0 + std::exp(-margin)); }

struct BoostParams {
  int n_estimators = 100;
  double learning_rate = 0.1;
  double subsample = 1.0;
  double colsample_bytree = 1.0;
  tree::TreeParams tree;
  std::uint64_t seed = 42;

  void validate() const {
    if (n_estimators < 1) fail(ErrorKind::Config, "n_estimators must be >= 1");
    if (learning_rate <= 0.0) fail(ErrorKind::Config, "learning_rate must be > 0");
    if (!(subsample > 0.0 && subsample <= 1.0)) {
      fail(ErrorKind::Config, "subsample must be in (0,1]");
    }
    if (!(colsample_bytree > 0.0 && colsample_bytree <= 1.0)) {
      fail(ErrorKind::Config, "colsample_bytree must be in (0,1]");
    }
    tree.validate();
  }
};

struct Model {
  Family family = Family::Xgb;
  std::vector<tree::Tree> trees;
  std::vector<double> tree_weights;  // AdaBoost stage weights; 1 otherwise
  double learning_rate = 1.0;
  double base_margin = 0.0;
  std::uint64_t schema_fingerprint = 0;
  std::string params_json;  // resolved parameter echo, for audit trails
  std::optional<linear::LogisticModel> logistic;

  // Margin-space scale of tree m, including shrinkage and stage weights.
  double tree_scale(std::size_t m) const {
    switch (family) {
      case Family::RandomForest:
        return 1.0 / static_cast<double>(trees.size());
      case Family::AdaBoost:
        return tree_weights[m];
      default:
        return tree_weights[m] * learning_rate;
    }
  }

  // AdaBoost stump vote in {-1,+1}; ties go to the positive class.
  static double leaf_vote(const std::vector<double>& leaf) {
    return leaf[1] >= leaf[0] ? 1.0 : -1.0;
  }

  double margin(std::span<const double> x) const {
    switch (family) {
      case Family::Logistic:
        return logistic->margin(x);
      case Family::RandomForest: {
        double p1 = 0.0;
        for (const auto& t : trees) p1 += tree::predict_tree(t, x)[1];
        return p1 / static_cast<double>(trees.size());
      }
      case Family::AdaBoost: {
        double s = 0.0;
        for (std::size_t m = 0; m < trees.size(); ++m) {
          s += tree_weights[m] * leaf_vote(tree::predict_tree(trees[m], x));
        }
        return s;
      }
      default: {
        double s = base_margin;
        for (std::size_t m = 0; m < trees.size(); ++m) {
          s += tree_weights[m] * learning_rate * tree::predict_tree(trees[m], x)[0];
        }
        return s;
      }
    }
  }

  std::pair<double, double> predict_proba(std::span<const double> x) const {
    switch (family) {
      case Family::Logistic:
        return logistic->predict_proba(x);
      case Family::RandomForest: {
        double p0 = 0.0, p1 = 0.0;
        for (const auto& t : trees) {
          const auto& leaf = tree::predict_tree(t, x);
          p0 += leaf[0];
          p1 += leaf[1];
        }
        const double k = 1.0 / static_cast<double>(trees.size());
        return {p0 * k, p1 * k};
      }
      default: {
        const double p1 = logistic_link(margin(x));
        return {1.0 - p1, p1};
      }
    }
  }

  int predict(std::span<const double> x) const {
    return predict_proba(x).second >= 0.5 ? 1 : 0;
  }

  void check_schema(const data::Dataset& d) const {
    if (d.schema.fingerprint() != schema_fingerprint) {
      fail(ErrorKind::Schema, "dataset schema does not match the model's fingerprint");
    }
  }

  std::pair<double, double> predict_proba(const data::Dataset& d, std::size_t row) const {
    check_schema(d);
    return predict_proba(d.row(row));
  }
};

// ---------------------------------------------------------------------------
// Random forest: bootstrap samples (optional test hook disables them), sqrt
// feature sampling per node, unweighted average of per-tree class vectors.

inline Model fit_random_forest(const data::Dataset& d, int n_estimators,
                               tree::TreeParams tree_params, std::uint64_t seed,
                               bool bootstrap = true) {
  if (n_estimators < 1) fail(ErrorKind::Config, "n_estimators must be >= 1");
  tree_params.criterion = tree::Criterion::Gini;

  Model model;
  model.family = Family::RandomForest;
  model.trees.resize(static_cast<std::size_t>(n_estimators));
  model.tree_weights.assign(static_cast<std::size_t>(n_estimators), 1.0);
  model.schema_fingerprint = d.schema.fingerprint();

  const MatrixView X = d.matrix();
  parallel_for(static_cast<std::size_t>(n_estimators), [&](std::size_t i) {
    std::vector<double> w(d.row_count, 1.0);
    if (bootstrap) {
      std::fill(w.begin(), w.end(), 0.0);
      Rng rng(seed, 0xb007 + i);
      for (std::size_t k = 0; k < d.row_count; ++k) w[rng.below(d.row_count)] += 1.0;
    }
    tree::TreeParams tp = tree_params;
    tp.seed = mix64(seed, 0x7265e5 + i);
    model.trees[i] = tree::fit_classification_tree(X, d.labels, w, tp);
  });
  return model;
}

// ---------------------------------------------------------------------------
// Gradient boosting on the logistic loss. One fitter covers the three
// variants:
//   gb   - first-order (h == 1), level-wise growth
//   xgb  - second-order, level-wise growth
//   lgbm - second-order, leaf-wise growth bounded by max_leaves

inline Model fit_boosted(const data::Dataset& d, const BoostParams& params,
                         Family variant) {
  if (!is_boosted(variant)) fail(ErrorKind::Config, "not a boosted family");
  params.validate();

  Model model;
  model.family = variant;
  model.learning_rate = params.learning_rate;
  model.base_margin = 0.0;  // probability 0.5
  model.schema_fingerprint = d.schema.fingerprint();

  const MatrixView X = d.matrix();
  const std::size_t n = d.row_count;
  const std::size_t M = d.feature_count;
  std::vector<double> margin(n, 0.0), g(n), h(n);

  tree::TreeParams tp = params.tree;
  tp.criterion = tree::Criterion::SecondOrder;
  tp.growth = variant == Family::Lgbm ? tree::Growth::LeafWise : tree::Growth::LevelWise;
  tp.max_features = tree::MaxFeatures::All;

  for (int round = 0; round < params.n_estimators; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = logistic_link(margin[i]);
      g[i] = p - static_cast<double>(d.labels[i]);
      h[i] = variant == Family::GradientBoosting ? 1.0 : p * (1.0 - p);
    }

    std::optional<std::vector<std::size_t>> rows;
    if (params.subsample < 1.0) {
      Rng rng(params.seed, 0x5ab5 + static_cast<std::uint64_t>(round));
      const auto want = static_cast<std::size_t>(
          std::floor(params.subsample * static_cast<double>(n) + 0.5));
      rows = rng.sample_without_replacement(n, std::max<std::size_t>(1, want));
    }

    std::optional<std::vector<std::size_t>> cols;
    if (params.colsample_bytree < 1.0) {
      Rng rng(params.seed, 0xc015 + static_cast<std::uint64_t>(round));
      const auto want = static_cast<std::size_t>(
          std::floor(params.colsample_bytree * static_cast<double>(M) + 0.5));
      cols = rng.sample_without_replacement(M, std::max<std::size_t>(1, want));
    }

    tp.seed = mix64(params.seed, 0x7e3 + static_cast<std::uint64_t>(round));
    tree::Tree t = tree::fit_regression_tree(X, g, h, tp, cols ? &*cols : nullptr,
                                             rows ? &*rows : nullptr);
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += params.learning_rate * tree::predict_tree(t, d.row(i))[0];
    }
    model.trees.push_back(std::move(t));
    model.tree_weights.push_back(1.0);
  }
  return model;
}

// ---------------------------------------------------------------------------
// SAMME AdaBoost with depth-1 gini stumps. Binary task, so the ln(K-1) term
// vanishes and the stage weight is learning_rate * ln((1-eps)/eps).
// Probability comes from the softmax over per-class summed stage weights,
// which for two classes reduces to logistic(sum of signed votes).

inline Model fit_adaboost(const data::Dataset& d, int n_estimators, double learning_rate,
                          std::uint64_t seed) {
  if (n_estimators < 1) fail(ErrorKind::Config, "n_estimators must be >= 1");
  if (learning_rate <= 0.0) fail(ErrorKind::Config, "learning_rate must be > 0");

  Model model;
  model.family = Family::AdaBoost;
  model.learning_rate = learning_rate;
  model.schema_fingerprint = d.schema.fingerprint();

  const MatrixView X = d.matrix();
  const std::size_t n = d.row_count;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));

  tree::TreeParams tp;
  tp.criterion = tree::Criterion::Gini;
  tp.max_depth = 1;
  tp.max_features = tree::MaxFeatures::All;
  tp.seed = seed;

  for (int round = 0; round < n_estimators; ++round) {
    tree::Tree stump = tree::fit_classification_tree(X, d.labels, w, tp);

    double eps = 0.0;
    std::vector<int> pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& leaf = tree::predict_tree(stump, d.row(i));
      pred[i] = Model::leaf_vote(leaf) > 0 ? 1 : 0;
      if (pred[i] != d.labels[i]) eps += w[i];
    }

    if (eps >= 0.5) {
      if (round == 0) {
        fail(ErrorKind::DegenerateModel, "first stump has weighted error >= 0.5");
      }
      break;  // alpha would be <= 0
    }
    if (eps == 0.0) {
      model.trees.push_back(std::move(stump));
      model.tree_weights.push_back(1.0);
      break;
    }

    const double alpha = learning_rate * std::log((1.0 - eps) / eps);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pred[i] != d.labels[i]) w[i] *= std::exp(alpha);
      total += w[i];
    }
    for (auto& wi : w) wi /= total;

    model.trees.push_back(std::move(stump));
    model.tree_weights.push_back(alpha);
  }
  return model;
}

}  // namespace osteo::ensemble
