#pragma once

// Stratified k-fold cross-validation and exhaustive grid search.
//
// Candidates are enumerated in odometer order over the declared axes (first
// axis most significant, values in declared order); ties on mean accuracy
// resolve to the earliest candidate. Failed candidates are recorded and
// excluded rather than aborting the search.

#include "osteo/params.hpp"

namespace osteo::tuning {

using params::json;

// Per-class round-robin assignment after a seeded shuffle, with a running
// global counter so fold sizes differ by at most one overall and per class.
inline std::vector<int> stratified_kfold(std::span<const int> labels, int k,
                                         std::uint64_t seed) {
  if (k < 2) fail(ErrorKind::Input, "k must be >= 2");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    auto& rows = by_class[static_cast<std::size_t>(c)];
    if (!rows.empty() && rows.size() < static_cast<std::size_t>(k)) {
      fail(ErrorKind::Stratification, "class " + std::to_string(c) +
                                          " has fewer than k=" + std::to_string(k) +
                                          " rows");
    }
  }
  std::vector<int> fold(labels.size(), -1);
  std::size_t counter = 0;
  for (int c = 0; c < 2; ++c) {
    auto& rows = by_class[static_cast<std::size_t>(c)];
    Rng rng(seed, 0xf01d + static_cast<std::uint64_t>(c));
    rng.shuffle(rows);
    for (std::size_t r : rows) {
      fold[r] = static_cast<int>(counter % static_cast<std::size_t>(k));
      ++counter;
    }
  }
  return fold;
}

struct ParamGrid {
  std::string family;
  // Ordered axes: (parameter name, candidate values in declared order).
  std::vector<std::pair<std::string, std::vector<json>>> axes;

  std::size_t candidate_count() const {
    std::size_t n = 1;
    for (const auto& axis : axes) n *= axis.second.size();
    return n;
  }

  // Candidate i in odometer order (last axis varies fastest).
  json candidate(std::size_t i) const {
    json out = json::object();
    for (std::size_t a = axes.size(); a-- > 0;) {
      const auto& values = axes[a].second;
      out[axes[a].first] = values[i % values.size()];
      i /= values.size();
    }
    return out;
  }

  void validate() const {
    if (axes.empty()) fail(ErrorKind::Config, "grid has no axes");
    const auto family_enum = ensemble::family_from_string(family);
    for (const auto& axis : axes) {
      if (axis.second.empty()) {
        fail(ErrorKind::Config, "grid axis '" + axis.first + "' has no values");
      }
    }
    // Axis-name validation: resolving a candidate rejects unknown keys.
    (void)params::resolved_params(family_enum, candidate(0));
  }
};

struct CandidateResult {
  json assignment;                    // the grid point as given
  std::vector<double> fold_accuracy;  // empty when the candidate failed
  double mean = 0.0;
  double stddev = 0.0;                // population standard deviation
  std::string error;                  // non-empty when the candidate failed
};

struct CVResult {
  std::vector<CandidateResult> candidates;
  int best_index = -1;
  int folds = 0;
  std::uint64_t seed = 0;
};

struct GridSearchOutcome {
  CVResult cv;
  ensemble::Model best_model;  // winner refit on the full training split
};

inline GridSearchOutcome grid_search(const data::Dataset& d, const ParamGrid& grid,
                                     int k, std::uint64_t seed) {
  grid.validate();
  const auto family = ensemble::family_from_string(grid.family);
  const auto fold = stratified_kfold(d.labels, k, seed);

  std::vector<std::vector<std::size_t>> train_rows(static_cast<std::size_t>(k));
  std::vector<std::vector<std::size_t>> val_rows(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < d.row_count; ++i) {
    for (int f = 0; f < k; ++f) {
      (fold[i] == f ? val_rows : train_rows)[static_cast<std::size_t>(f)].push_back(i);
    }
  }
  std::vector<data::Dataset> fold_train, fold_val;
  for (int f = 0; f < k; ++f) {
    fold_train.push_back(d.subset(train_rows[static_cast<std::size_t>(f)]));
    fold_val.push_back(d.subset(val_rows[static_cast<std::size_t>(f)]));
  }

  CVResult cv;
  cv.folds = k;
  cv.seed = seed;
  const std::size_t n_candidates = grid.candidate_count();

  for (std::size_t c = 0; c < n_candidates; ++c) {
    CandidateResult res;
    res.assignment = grid.candidate(c);
    try {
      for (int f = 0; f < k; ++f) {
        const auto fit_seed = mix64(seed, c, static_cast<std::uint64_t>(f));
        const auto model =
            params::fit_family(fold_train[static_cast<std::size_t>(f)], family,
                               res.assignment, fit_seed);
        const auto& val = fold_val[static_cast<std::size_t>(f)];
        std::size_t correct = 0;
        for (std::size_t i = 0; i < val.row_count; ++i) {
          correct += model.predict(val.row(i)) == val.labels[i] ? 1 : 0;
        }
        res.fold_accuracy.push_back(static_cast<double>(correct) /
                                    static_cast<double>(val.row_count));
      }
      double sum = 0.0;
      for (double a : res.fold_accuracy) sum += a;
      res.mean = sum / static_cast<double>(k);
      double ss = 0.0;
      for (double a : res.fold_accuracy) ss += (a - res.mean) * (a - res.mean);
      res.stddev = std::sqrt(ss / static_cast<double>(k));
      if (cv.best_index < 0 ||
          res.mean > cv.candidates[static_cast<std::size_t>(cv.best_index)].mean) {
        cv.best_index = static_cast<int>(c);
      }
    } catch (const Error& e) {
      res.error = e.what();
      res.fold_accuracy.clear();
    }
    cv.candidates.push_back(std::move(res));
  }

  if (cv.best_index < 0) {
    fail(ErrorKind::Search, "every grid candidate failed to fit");
  }

  GridSearchOutcome out;
  const auto& winner = cv.candidates[static_cast<std::size_t>(cv.best_index)];
  out.best_model = params::fit_family(
      d, family, winner.assignment,
      mix64(seed, static_cast<std::uint64_t>(cv.best_index), 0x2ef17));
  out.cv = std::move(cv);
  return out;
}

// Grid files are parsed as ordered JSON so the declared axis order (and with
// it the tie-breaking enumeration order) survives the round trip.
inline ParamGrid grid_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object() || !j.contains("family") || !j.contains("axes") ||
      !j["axes"].is_object()) {
    fail(ErrorKind::Config, "grid file must be {\"family\": ..., \"axes\": {...}}");
  }
  ParamGrid grid;
  grid.family = j["family"].get<std::string>();
  for (auto it = j["axes"].begin(); it != j["axes"].end(); ++it) {
    if (!it.value().is_array()) {
      fail(ErrorKind::Config, "grid axis '" + it.key() + "' must be an array");
    }
    std::vector<json> values;
    for (const auto& v : it.value()) values.push_back(json(v));
    grid.axes.emplace_back(it.key(), std::move(values));
  }
  grid.validate();
  return grid;
}

}  // namespace osteo::tuning
