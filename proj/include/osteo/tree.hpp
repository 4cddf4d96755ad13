#pragma once

// Single binary decision tree, the base learner for every ensemble family:
//   * gini classification trees (random forest, AdaBoost stumps)
//   * second-order regularized regression trees (all boosted variants)
//
// Split search is exact greedy: every midpoint between adjacent distinct
// values of every candidate feature is scored. Ties break on lowest feature
// index, then lowest threshold, so fits are reproducible.
//
// Routing rule: value < threshold goes left; a value exactly at the
// threshold goes right.

#include <functional>

#include "osteo/common.hpp"

namespace osteo::tree {

enum class Growth { LevelWise, LeafWise };
enum class Criterion { Gini, SecondOrder };
enum class MaxFeatures { All, Sqrt };

struct TreeParams {
  int max_depth = 6;             // 0 fits a single leaf
  double min_child_weight = 0.0; // weight (gini) or Hessian (second-order) floor per child
  double reg_lambda = 0.0;       // L2 on leaf weights
  double reg_alpha = 0.0;        // L1 on leaf weights (soft threshold)
  Growth growth = Growth::LevelWise;
  int max_leaves = 31;           // leaf-wise growth only
  Criterion criterion = Criterion::Gini;
  MaxFeatures max_features = MaxFeatures::All;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_depth < 0) fail(ErrorKind::Config, "max_depth must be >= 0");
    if (min_child_weight < 0) fail(ErrorKind::Config, "min_child_weight must be >= 0");
    if (reg_lambda < 0) fail(ErrorKind::Config, "reg_lambda must be >= 0");
    if (reg_alpha < 0) fail(ErrorKind::Config, "reg_alpha must be >= 0");
    if (max_leaves < 1) fail(ErrorKind::Config, "max_leaves must be >= 1");
  }
};

struct TreeNode {
  int feature = -1;          // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  // Leaf payload: {p0, p1} for gini trees, {weight} for second-order trees.
  std::vector<double> value;
  // Sum of instance weights (gini) or Hessians (second-order) reaching the
  // node; the path-dependent Shapley recursion depends on it.
  double cover = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;
  int root = 0;

  const TreeNode& at(int i) const { return nodes[static_cast<std::size_t>(i)]; }

  std::size_t leaf_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes) n += node.is_leaf() ? 1 : 0;
    return n;
  }

  int depth() const {
    int best = 0;
    std::vector<std::pair<int, int>> stack{{root, 0}};
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      const auto& node = at(i);
      if (!node.is_leaf()) {
        stack.push_back({node.left, d + 1});
        stack.push_back({node.right, d + 1});
      }
    }
    return best;
  }
};

inline const std::vector<double>& predict_tree(const Tree& t,
                                               std::span<const double> x) {
  int i = t.root;
  for (;;) {
    const TreeNode& node = t.at(i);
    if (node.is_leaf()) return node.value;
    const double v = x[static_cast<std::size_t>(node.feature)];
    if (!std::isfinite(v)) {
      fail(ErrorKind::Prediction, "non-finite feature value");
    }
    i = v < node.threshold ? node.left : node.right;
  }
}

namespace detail {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  double left_stat = 0.0;   // criterion-specific summaries of the left side
  double left_stat2 = 0.0;
};

// (gain, feature, threshold) ordering: larger gain wins; on equal gain the
// lower feature index wins, then the lower threshold.
inline bool better_split(double gain, int feature, double threshold,
                         const SplitChoice& best) {
  if (!best.found) return gain > 0.0;
  if (gain != best.gain) return gain > best.gain;
  if (feature != best.feature) return feature < best.feature;
  return threshold < best.threshold;
}

struct FitContext {
  MatrixView X;
  const std::vector<std::size_t>* candidate_features = nullptr;  // nullptr = all
  TreeParams params;
};

// Sorted (value, payload...) scan shared by both criteria.
template <typename ScoreFn>
SplitChoice scan_feature(const FitContext& ctx, const std::vector<std::size_t>& rows,
                         std::size_t feature, std::vector<std::pair<double, std::size_t>>& scratch,
                         ScoreFn&& score, SplitChoice best) {
  scratch.clear();
  for (std::size_t r : rows) scratch.push_back({ctx.X.at(r, feature), r});
  std::sort(scratch.begin(), scratch.end());
  for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
    score(scratch[i].second, /*boundary=*/scratch[i].first != scratch[i + 1].first,
          (scratch[i].first + scratch[i + 1].first) * 0.5,
          static_cast<int>(feature), best);
  }
  return best;
}

inline std::vector<std::size_t> node_features(const FitContext& ctx, Rng& node_rng) {
  std::vector<std::size_t> all;
  if (ctx.candidate_features) {
    all = *ctx.candidate_features;
  } else {
    all.resize(ctx.X.cols);
    for (std::size_t j = 0; j < ctx.X.cols; ++j) all[j] = j;
  }
  if (ctx.params.max_features == MaxFeatures::All) return all;
  const std::size_t k = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(all.size()))));
  const auto pick = node_rng.sample_without_replacement(all.size(), k);
  std::vector<std::size_t> out;
  out.reserve(pick.size());
  for (std::size_t p : pick) out.push_back(all[p]);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gini classification tree.

inline Tree fit_classification_tree(MatrixView X, std::span<const int> y,
                                    std::span<const double> w, const TreeParams& params,
                                    const std::vector<std::size_t>* candidate_features = nullptr) {
  params.validate();
  if (params.criterion != Criterion::Gini) {
    fail(ErrorKind::Config, "classification tree requires the gini criterion");
  }
  if (X.rows == 0 || y.size() != X.rows || w.size() != X.rows) {
    fail(ErrorKind::Fit, "empty input or mismatched lengths");
  }
  std::vector<std::size_t> rows;
  double total_w = 0.0;
  for (std::size_t i = 0; i < X.rows; ++i) {
    if (w[i] < 0.0) fail(ErrorKind::Fit, "negative instance weight");
    if (w[i] > 0.0) {
      rows.push_back(i);
      total_w += w[i];
    }
  }
  if (rows.empty()) fail(ErrorKind::Fit, "all instance weights are zero");

  detail::FitContext ctx{X, candidate_features, params};
  Tree t;
  std::vector<std::pair<double, std::size_t>> scratch;
  std::uint64_t node_counter = 0;

  // Weighted gini "score" of a node in unnormalized form: W - sum_c w_c^2/W.
  auto gini_score = [](double w0, double w1) {
    const double W = w0 + w1;
    return W <= 0.0 ? 0.0 : W - (w0 * w0 + w1 * w1) / W;
  };

  std::function<int(std::vector<std::size_t>&, int)> build =
      [&](std::vector<std::size_t>& node_rows, int depth) -> int {
    double w0 = 0.0, w1 = 0.0;
    for (std::size_t r : node_rows) (y[r] == 1 ? w1 : w0) += w[r];
    const double W = w0 + w1;

    const int id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    t.nodes[static_cast<std::size_t>(id)].cover = W;
    Rng node_rng(params.seed, 0x67696e69ULL + node_counter++);

    const bool pure = w0 == 0.0 || w1 == 0.0;
    detail::SplitChoice best;
    if (depth < params.max_depth && !pure && node_rows.size() > 1) {
      const double parent_score = gini_score(w0, w1);
      for (std::size_t f : detail::node_features(ctx, node_rng)) {
        double lw0 = 0.0, lw1 = 0.0;
        best = detail::scan_feature(
            ctx, node_rows, f, scratch,
            [&](std::size_t r, bool boundary, double threshold, int feature,
                detail::SplitChoice& acc) {
              (y[r] == 1 ? lw1 : lw0) += w[r];
              if (!boundary) return;
              const double lw = lw0 + lw1, rw = W - lw;
              if (lw < params.min_child_weight || rw < params.min_child_weight) return;
              const double gain =
                  parent_score - gini_score(lw0, lw1) - gini_score(w0 - lw0, w1 - lw1);
              if (detail::better_split(gain, feature, threshold, acc)) {
                acc = {true, feature, threshold, gain, lw0, lw1};
              }
            },
            best);
      }
    }

    if (!best.found) {
      auto& node = t.nodes[static_cast<std::size_t>(id)];
      node.value = {w0 / W, w1 / W};
      return id;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : node_rows) {
      (X.at(r, static_cast<std::size_t>(best.feature)) < best.threshold ? left_rows
                                                                        : right_rows)
          .push_back(r);
    }
    node_rows.clear();
    node_rows.shrink_to_fit();
    const int left = build(left_rows, depth + 1);
    const int right = build(right_rows, depth + 1);
    auto& node = t.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    // Exact additivity: internal cover is the sum of its children.
    node.cover = t.at(left).cover + t.at(right).cover;
    return id;
  };

  build(rows, 0);
  return t;
}

// ---------------------------------------------------------------------------
// Second-order regression tree.
//
// Split gain: 0.5 * [GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)].
// Leaf weight: -sign(G) * max(|G|-alpha, 0) / (H+lambda).

namespace detail {

inline double leaf_weight(double G, double H, double lambda, double alpha) {
  const double denom = H + lambda;
  if (denom <= 0.0) return 0.0;
  const double mag = std::max(std::abs(G) - alpha, 0.0);
  return G > 0.0 ? -mag / denom : mag / denom;
}

inline double score_term(double G, double H, double lambda) {
  const double denom = H + lambda;
  return denom <= 0.0 ? 0.0 : G * G / denom;
}

struct GradNodeState {
  std::vector<std::size_t> rows;
  double G = 0.0, H = 0.0;
  int depth = 0;
  int id = -1;
  SplitChoice best;
};

}  // namespace detail

inline Tree fit_regression_tree(MatrixView X, std::span<const double> g,
                                std::span<const double> h, const TreeParams& params,
                                const std::vector<std::size_t>* candidate_features = nullptr,
                                const std::vector<std::size_t>* row_subset = nullptr) {
  params.validate();
  if (params.criterion != Criterion::SecondOrder) {
    fail(ErrorKind::Config, "regression tree requires the second_order criterion");
  }
  if (X.rows == 0 || g.size() != X.rows || h.size() != X.rows) {
    fail(ErrorKind::Fit, "empty input or mismatched gradient/Hessian lengths");
  }
  for (double v : h) {
    if (v < 0.0) fail(ErrorKind::Fit, "negative Hessian");
  }

  detail::FitContext ctx{X, candidate_features, params};
  Tree t;
  std::vector<std::pair<double, std::size_t>> scratch;

  auto find_best = [&](const detail::GradNodeState& st) {
    detail::SplitChoice best;
    if (st.depth >= params.max_depth || st.rows.size() < 2) return best;
    const double parent_term = detail::score_term(st.G, st.H, params.reg_lambda);
    Rng node_rng(params.seed, 0x32716f64ULL + static_cast<std::uint64_t>(st.id));
    for (std::size_t f : detail::node_features(ctx, node_rng)) {
      double GL = 0.0, HL = 0.0;
      best = detail::scan_feature(
          ctx, st.rows, f, scratch,
          [&](std::size_t r, bool boundary, double threshold, int feature,
              detail::SplitChoice& acc) {
            GL += g[r];
            HL += h[r];
            if (!boundary) return;
            const double GR = st.G - GL, HR = st.H - HL;
            if (HL < params.min_child_weight || HR < params.min_child_weight) return;
            const double gain = 0.5 * (detail::score_term(GL, HL, params.reg_lambda) +
                                       detail::score_term(GR, HR, params.reg_lambda) -
                                       parent_term);
            if (detail::better_split(gain, feature, threshold, acc)) {
              acc = {true, feature, threshold, gain, GL, HL};
            }
          },
          best);
    }
    return best;
  };

  auto make_state = [&](std::vector<std::size_t> rows, int depth) {
    detail::GradNodeState st;
    st.rows = std::move(rows);
    st.depth = depth;
    for (std::size_t r : st.rows) {
      st.G += g[r];
      st.H += h[r];
    }
    st.id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    t.nodes[static_cast<std::size_t>(st.id)].cover = st.H;
    return st;
  };

  auto seal_leaf = [&](const detail::GradNodeState& st) {
    auto& node = t.nodes[static_cast<std::size_t>(st.id)];
    node.value = {detail::leaf_weight(st.G, st.H, params.reg_lambda, params.reg_alpha)};
  };

  auto split_state = [&](detail::GradNodeState& st)
      -> std::pair<detail::GradNodeState, detail::GradNodeState> {
    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : st.rows) {
      (X.at(r, static_cast<std::size_t>(st.best.feature)) < st.best.threshold
           ? left_rows
           : right_rows)
          .push_back(r);
    }
    st.rows.clear();
    st.rows.shrink_to_fit();
    auto left = make_state(std::move(left_rows), st.depth + 1);
    auto right = make_state(std::move(right_rows), st.depth + 1);
    auto& node = t.nodes[static_cast<std::size_t>(st.id)];
    node.feature = st.best.feature;
    node.threshold = st.best.threshold;
    node.left = left.id;
    node.right = right.id;
    node.cover = t.at(left.id).cover + t.at(right.id).cover;
    return {std::move(left), std::move(right)};
  };

  std::vector<std::size_t> all_rows;
  if (row_subset) {
    all_rows = *row_subset;
  } else {
    all_rows.resize(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) all_rows[i] = i;
  }
  if (all_rows.empty()) fail(ErrorKind::Fit, "empty row subset");

  if (params.growth == Growth::LevelWise) {
    std::function<void(detail::GradNodeState)> expand = [&](detail::GradNodeState st) {
      st.best = find_best(st);
      if (!st.best.found) {
        seal_leaf(st);
        return;
      }
      auto [left, right] = split_state(st);
      expand(std::move(left));
      expand(std::move(right));
    };
    expand(make_state(std::move(all_rows), 0));
  } else {
    // Leaf-wise: repeatedly expand the open leaf with the largest gain until
    // max_leaves is reached or no leaf has positive gain. Ties resolve to the
    // earliest-created node.
    std::vector<detail::GradNodeState> open;
    open.push_back(make_state(std::move(all_rows), 0));
    open.back().best = find_best(open.back());
    std::size_t leaves = 1;
    while (leaves < static_cast<std::size_t>(params.max_leaves)) {
      std::size_t pick = open.size();
      for (std::size_t i = 0; i < open.size(); ++i) {
        if (!open[i].best.found) continue;
        if (pick == open.size() || open[i].best.gain > open[pick].best.gain ||
            (open[i].best.gain == open[pick].best.gain && open[i].id < open[pick].id)) {
          pick = i;
        }
      }
      if (pick == open.size()) break;
      auto st = std::move(open[pick]);
      open.erase(open.begin() + static_cast<long>(pick));
      auto [left, right] = split_state(st);
      left.best = find_best(left);
      right.best = find_best(right);
      open.push_back(std::move(left));
      open.push_back(std::move(right));
      ++leaves;
    }
    for (auto& st : open) seal_leaf(st);
  }
  return t;
}

}  // namespace osteo::tree
