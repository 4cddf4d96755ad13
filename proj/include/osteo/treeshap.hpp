#pragma once

// Exact path-dependent Shapley attribution for tree ensembles.
//
// The value function descends each tree: when the split feature is in the
// coalition the instance's branch is followed, otherwise both branches
// contribute weighted by cover ratios. The polynomial-time algorithm keeps
// a path of unique features and maintains the permutation weights
// incrementally (extend on descent, unwind at leaves and on repeated
// features).
//
// Attribution space per family:
//   boosted   - margin units, leaf values scaled by learning rate
//   adaboost  - signed stage-weighted votes
//   forest    - positive-class probability, averaged over trees
// Linearity of Shapley values makes the ensemble attribution the
// scale-weighted sum of per-tree attributions.

#include "osteo/ensemble.hpp"

namespace osteo::explain {

struct Attribution {
  double baseline = 0.0;                // expected margin over training cover
  std::vector<double> contributions;    // one per feature, margin units
  double output = 0.0;                  // model margin at x

  double reconstructed() const {
    double s = baseline;
    for (double c : contributions) s += c;
    return s;
  }
};

namespace detail {

struct PathElement {
  int feature_index = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double pweight = 0.0;
};

inline void extend_path(PathElement* path, int depth, double zero_fraction,
                        double one_fraction, int feature_index) {
  path[depth] = {feature_index, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].pweight +=
        one_fraction * path[i].pweight * (i + 1) / static_cast<double>(depth + 1);
    path[i].pweight =
        zero_fraction * path[i].pweight * (depth - i) / static_cast<double>(depth + 1);
  }
}

inline void unwind_path(PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one = path[depth].pweight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = path[i].pweight;
      path[i].pweight = next_one * (depth + 1) / static_cast<double>((i + 1) * one_fraction);
      next_one = tmp - path[i].pweight * zero_fraction * (depth - i) /
                           static_cast<double>(depth + 1);
    } else {
      path[i].pweight =
          path[i].pweight * (depth + 1) / static_cast<double>(zero_fraction * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature_index = path[i + 1].feature_index;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

inline double unwound_sum(const PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one = path[depth].pweight;
  double total = 0.0;
  if (one_fraction != 0.0) {
    for (int i = depth - 1; i >= 0; --i) {
      const double tmp = next_one / static_cast<double>((i + 1) * one_fraction);
      total += tmp;
      next_one = path[i].pweight - tmp * zero_fraction * (depth - i);
    }
  } else {
    for (int i = depth - 1; i >= 0; --i) {
      total += path[i].pweight / (zero_fraction * (depth - i));
    }
  }
  return total * (depth + 1);
}

// Per-tree scalar view: probability of class 1 for gini leaves, the raw
// weight for regression leaves, the signed vote for AdaBoost stumps.
using LeafScalar = double (*)(const std::vector<double>&);

inline double leaf_scalar_probability(const std::vector<double>& v) { return v[1]; }
inline double leaf_scalar_regression(const std::vector<double>& v) { return v[0]; }
inline double leaf_scalar_vote(const std::vector<double>& v) {
  return ensemble::Model::leaf_vote(v);
}

inline void shap_recurse(const tree::Tree& t, LeafScalar leaf_scalar,
                         std::span<const double> x, double scale,
                         std::vector<double>& phi, int node_index, int depth,
                         PathElement* parent_path, double parent_zero_fraction,
                         double parent_one_fraction, int parent_feature_index) {
  PathElement* path = parent_path + depth + 1;
  std::copy(parent_path, parent_path + depth + 1, path);
  extend_path(path, depth, parent_zero_fraction, parent_one_fraction,
              parent_feature_index);

  const auto& node = t.at(node_index);
  if (node.is_leaf()) {
    const double value = leaf_scalar(node.value);
    for (int i = 1; i <= depth; ++i) {
      const double w = unwound_sum(path, depth, i);
      const PathElement& el = path[i];
      phi[static_cast<std::size_t>(el.feature_index)] +=
          scale * w * (el.one_fraction - el.zero_fraction) * value;
    }
    return;
  }

  const auto split_feature = static_cast<std::size_t>(node.feature);
  const int hot = x[split_feature] < node.threshold ? node.left : node.right;
  const int cold = hot == node.left ? node.right : node.left;
  const double hot_zero_fraction = t.at(hot).cover / node.cover;
  const double cold_zero_fraction = t.at(cold).cover / node.cover;
  double incoming_zero_fraction = 1.0;
  double incoming_one_fraction = 1.0;

  // A repeated feature on the path is undone here and redone for this node.
  int path_index = 0;
  for (; path_index <= depth; ++path_index) {
    if (path[path_index].feature_index == node.feature) break;
  }
  if (path_index != depth + 1) {
    incoming_zero_fraction = path[path_index].zero_fraction;
    incoming_one_fraction = path[path_index].one_fraction;
    unwind_path(path, depth, path_index);
    depth -= 1;
  }

  shap_recurse(t, leaf_scalar, x, scale, phi, hot, depth + 1, path,
               hot_zero_fraction * incoming_zero_fraction, incoming_one_fraction,
               node.feature);
  shap_recurse(t, leaf_scalar, x, scale, phi, cold, depth + 1, path,
               cold_zero_fraction * incoming_zero_fraction, 0.0, node.feature);
}

inline double expected_value(const tree::Tree& t, LeafScalar leaf_scalar, int node_index) {
  const auto& node = t.at(node_index);
  if (node.is_leaf()) return leaf_scalar(node.value);
  const double wl = t.at(node.left).cover;
  const double wr = t.at(node.right).cover;
  return (wl * expected_value(t, leaf_scalar, node.left) +
          wr * expected_value(t, leaf_scalar, node.right)) /
         (wl + wr);
}

inline LeafScalar leaf_scalar_for(ensemble::Family family) {
  switch (family) {
    case ensemble::Family::RandomForest: return leaf_scalar_probability;
    case ensemble::Family::AdaBoost: return leaf_scalar_vote;
    default: return leaf_scalar_regression;
  }
}

// Shapley attribution of a single tree with an externally chosen scalar
// view and scale; exposed for tests that build trees by hand.
inline void single_tree_shap(const tree::Tree& t, LeafScalar leaf_scalar, double scale,
                             std::span<const double> x, std::vector<double>& phi) {
  const int depth = t.depth();
  const std::size_t path_len =
      static_cast<std::size_t>((depth + 2) * (depth + 3)) / 2 + 1;
  std::vector<PathElement> path(path_len);
  shap_recurse(t, leaf_scalar, x, scale, phi, t.root, 0, path.data(), 1.0, 1.0, -1);
}

}  // namespace detail

inline Attribution tree_shap(const ensemble::Model& m, std::span<const double> x) {
  if (m.family == ensemble::Family::Logistic) {
    fail(ErrorKind::Unsupported,
         "tree_shap requires a tree-family model (use lime or pfi for logistic)");
  }
  const auto leaf_scalar = detail::leaf_scalar_for(m.family);

  Attribution out;
  out.contributions.assign(x.size(), 0.0);
  out.baseline = m.family == ensemble::Family::RandomForest ||
                         m.family == ensemble::Family::AdaBoost
                     ? 0.0
                     : m.base_margin;
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    const double scale = m.tree_scale(t);
    detail::single_tree_shap(m.trees[t], leaf_scalar, scale, x, out.contributions);
    out.baseline += scale * detail::expected_value(m.trees[t], leaf_scalar, m.trees[t].root);
  }
  out.output = m.margin(x);
  return out;
}

// ---------------------------------------------------------------------------
// Dataset-level summary: mean absolute contribution per feature.

struct ShapSummary {
  std::vector<double> mean_abs;                 // per feature
  std::vector<std::vector<double>> matrix;      // per row x feature
  std::vector<double> outputs;                  // model margin per row
  double baseline = 0.0;
  std::vector<std::size_t> ranking;             // features by mean_abs, descending
};

// Baseline of the attribution, identical for every explained row.
inline double shap_baseline(const ensemble::Model& m) {
  const auto leaf_scalar = detail::leaf_scalar_for(m.family);
  double baseline = ensemble::is_boosted(m.family) ? m.base_margin : 0.0;
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    baseline +=
        m.tree_scale(t) * detail::expected_value(m.trees[t], leaf_scalar, m.trees[t].root);
  }
  return baseline;
}

inline ShapSummary shap_summary(const ensemble::Model& m, const data::Dataset& d) {
  m.check_schema(d);
  ShapSummary out;
  out.baseline = shap_baseline(m);
  out.matrix.assign(d.row_count, {});
  out.outputs.assign(d.row_count, 0.0);
  parallel_for(d.row_count, [&](std::size_t i) {
    auto attr = tree_shap(m, d.row(i));
    out.outputs[i] = attr.output;
    out.matrix[i] = std::move(attr.contributions);
  });
  out.mean_abs.assign(d.feature_count, 0.0);
  for (const auto& row : out.matrix) {
    for (std::size_t j = 0; j < row.size(); ++j) out.mean_abs[j] += std::abs(row[j]);
  }
  for (auto& v : out.mean_abs) v /= static_cast<double>(d.row_count);
  out.ranking.resize(d.feature_count);
  for (std::size_t j = 0; j < d.feature_count; ++j) out.ranking[j] = j;
  std::sort(out.ranking.begin(), out.ranking.end(), [&](std::size_t a, std::size_t b) {
    if (out.mean_abs[a] != out.mean_abs[b]) return out.mean_abs[a] > out.mean_abs[b];
    return a < b;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Waterfall: contributions ordered by |value| descending with running
// totals from the baseline; everything beyond the top 9 collapses into an
// "(others)" bucket, mirroring a 10-row waterfall plot.

struct WaterfallRow {
  std::string feature;
  double contribution = 0.0;
  double cumulative = 0.0;
};

struct Waterfall {
  double baseline = 0.0;
  double output = 0.0;
  std::vector<WaterfallRow> rows;
};

inline Waterfall shap_waterfall(const ensemble::Model& m, std::span<const double> x,
                                const std::vector<std::string>& feature_names,
                                std::size_t top = 9) {
  const auto attr = tree_shap(m, x);
  Waterfall out;
  out.baseline = attr.baseline;
  out.output = attr.output;

  // Exact-zero contributions are display no-ops and stay out of the rows.
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < attr.contributions.size(); ++j) {
    if (attr.contributions[j] != 0.0) order.push_back(j);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = std::abs(attr.contributions[a]);
    const double vb = std::abs(attr.contributions[b]);
    if (va != vb) return va > vb;
    return a < b;
  });

  double running = attr.baseline;
  const std::size_t shown = std::min(top, order.size());
  for (std::size_t k = 0; k < shown; ++k) {
    const std::size_t j = order[k];
    running += attr.contributions[j];
    out.rows.push_back({feature_names[j], attr.contributions[j], running});
  }
  if (order.size() > shown) {
    double rest = 0.0;
    for (std::size_t k = shown; k < order.size(); ++k) rest += attr.contributions[order[k]];
    running += rest;
    out.rows.push_back({"(others)", rest, running});
  }
  if (out.rows.empty()) out.rows.push_back({"(others)", 0.0, running});
  return out;
}

}  // namespace osteo::explain
