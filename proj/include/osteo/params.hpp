#pragma once

// JSON parameter handling: per-family validation, defaults, and the fit
// dispatcher used by the trainer and the grid search. The resolved
// parameter set (explicit values plus applied defaults) is echoed into the
// fitted model so every report is auditable.

#include <json.hpp>

#include "osteo/ensemble.hpp"

namespace osteo::params {

using json = nlohmann::json;
using ensemble::Family;

namespace detail {

inline double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) fail(ErrorKind::Config, "parameter '" + key + "' must be a number");
  return v.get<double>();
}

inline int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) {
    fail(ErrorKind::Config, "parameter '" + key + "' must be an integer");
  }
  return v.get<int>();
}

inline std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) fail(ErrorKind::Config, "parameter '" + key + "' must be a string");
  return v.get<std::string>();
}

inline void check_keys(const json& p, const std::vector<std::string>& allowed,
                       const std::string& family) {
  for (auto it = p.begin(); it != p.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed) ok = ok || k == it.key();
    if (!ok) {
      fail(ErrorKind::Config,
           "unknown parameter '" + it.key() + "' for family " + family);
    }
  }
}

}  // namespace detail

// Defaults applied when a parameter is absent. Table-style configuration
// files only pin the values they care about.
inline json resolved_params(Family family, const json& given) {
  if (!given.is_object()) fail(ErrorKind::Config, "params must be a JSON object");
  json p = given;
  auto set_default = [&p](const std::string& key, const json& value) {
    if (!p.contains(key)) p[key] = value;
  };
  switch (family) {
    case Family::RandomForest:
      detail::check_keys(p, {"criterion", "max_depth", "max_features", "n_estimators"},
                         "rf");
      set_default("criterion", "gini");
      set_default("max_depth", 10);
      set_default("max_features", "sqrt");
      set_default("n_estimators", 100);
      break;
    case Family::Logistic:
      detail::check_keys(p, {"C", "penalty", "solver", "tol", "max_iter"}, "lr");
      set_default("C", 1.0);
      set_default("penalty", "l1");
      set_default("solver", "liblinear");
      set_default("tol", 1e-6);
      set_default("max_iter", 10000);
      break;
    case Family::AdaBoost:
      detail::check_keys(p, {"algorithm", "learning_rate", "n_estimators"}, "ab");
      set_default("algorithm", "SAMME");
      set_default("learning_rate", 1.0);
      set_default("n_estimators", 50);
      break;
    case Family::GradientBoosting:
    case Family::Xgb:
    case Family::Lgbm: {
      detail::check_keys(p,
                         {"n_estimators", "learning_rate", "max_depth", "reg_lambda",
                          "reg_alpha", "min_child_weight", "subsample",
                          "colsample_bytree", "max_leaves"},
                         ensemble::to_string(family));
      set_default("n_estimators", 100);
      set_default("learning_rate", family == Family::Xgb ? 0.3 : 0.1);
      set_default("max_depth", family == Family::Lgbm ? 16 : (family == Family::Xgb ? 6 : 3));
      set_default("reg_lambda", family == Family::Xgb ? 1.0 : 0.0);
      set_default("reg_alpha", 0.0);
      set_default("min_child_weight", family == Family::GradientBoosting ? 0.0 : 1.0);
      set_default("subsample", 1.0);
      set_default("colsample_bytree", 1.0);
      if (family == Family::Lgbm) set_default("max_leaves", 31);
      break;
    }
  }
  return p;
}

inline ensemble::Model fit_family(const data::Dataset& train, Family family,
                                  const json& given, std::uint64_t seed) {
  const json p = resolved_params(family, given);
  ensemble::Model model;

  switch (family) {
    case Family::RandomForest: {
      if (detail::as_string(p["criterion"], "criterion") != "gini") {
        fail(ErrorKind::Config, "rf criterion must be 'gini'");
      }
      tree::TreeParams tp;
      tp.criterion = tree::Criterion::Gini;
      tp.max_depth = detail::as_int(p["max_depth"], "max_depth");
      const std::string mf = detail::as_string(p["max_features"], "max_features");
      if (mf == "sqrt") {
        tp.max_features = tree::MaxFeatures::Sqrt;
      } else if (mf == "all") {
        tp.max_features = tree::MaxFeatures::All;
      } else {
        fail(ErrorKind::Config, "max_features must be 'sqrt' or 'all'");
      }
      model = ensemble::fit_random_forest(
          train, detail::as_int(p["n_estimators"], "n_estimators"), tp, seed);
      break;
    }
    case Family::Logistic: {
      if (detail::as_string(p["penalty"], "penalty") != "l1") {
        fail(ErrorKind::Config, "lr penalty must be 'l1'");
      }
      if (detail::as_string(p["solver"], "solver") != "liblinear") {
        fail(ErrorKind::Config, "lr solver must be 'liblinear'");
      }
      model.family = Family::Logistic;
      model.logistic = linear::fit_logistic_l1(
          train.matrix(), train.labels, detail::as_number(p["C"], "C"),
          detail::as_number(p["tol"], "tol"), detail::as_int(p["max_iter"], "max_iter"));
      model.schema_fingerprint = train.schema.fingerprint();
      break;
    }
    case Family::AdaBoost: {
      if (detail::as_string(p["algorithm"], "algorithm") != "SAMME") {
        fail(ErrorKind::Config, "ab algorithm must be 'SAMME'");
      }
      model = ensemble::fit_adaboost(
          train, detail::as_int(p["n_estimators"], "n_estimators"),
          detail::as_number(p["learning_rate"], "learning_rate"), seed);
      break;
    }
    default: {
      ensemble::BoostParams bp;
      bp.n_estimators = detail::as_int(p["n_estimators"], "n_estimators");
      bp.learning_rate = detail::as_number(p["learning_rate"], "learning_rate");
      bp.subsample = detail::as_number(p["subsample"], "subsample");
      bp.colsample_bytree = detail::as_number(p["colsample_bytree"], "colsample_bytree");
      bp.tree.max_depth = detail::as_int(p["max_depth"], "max_depth");
      bp.tree.reg_lambda = detail::as_number(p["reg_lambda"], "reg_lambda");
      bp.tree.reg_alpha = detail::as_number(p["reg_alpha"], "reg_alpha");
      bp.tree.min_child_weight = detail::as_number(p["min_child_weight"], "min_child_weight");
      if (family == Family::Lgbm) {
        bp.tree.max_leaves = detail::as_int(p["max_leaves"], "max_leaves");
      }
      bp.seed = seed;
      model = ensemble::fit_boosted(train, bp, family);
      break;
    }
  }
  model.params_json = p.dump();
  return model;
}

}  // namespace osteo::params
