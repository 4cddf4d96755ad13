#pragma once

// Model file format (JSON, sorted keys):
//
// {
//   "family": "rf|gb|xgb|lgbm|ab|lr",
//   "params": { ... resolved parameter echo ... },
//   "base_margin": 0.0,
//   "learning_rate": 0.1,
//   "tree_weights": [...],
//   "trees": [ [ {"feature", "threshold", "left", "right", "leaf_value",
//                 "cover"}, ... ], ... ],
//   "schema_fingerprint": "hex",
//   "linear": {"weights", "intercept", "means", "scales", "converged"}   (lr)
// }
//
// Numbers round-trip exactly (shortest-representation doubles), so a loaded
// model predicts bit-identically.

#include <fstream>

#include <json.hpp>

#include "osteo/dataset.hpp"
#include "osteo/ensemble.hpp"

namespace osteo::serialize {

using json = nlohmann::json;

inline json tree_to_json(const tree::Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    json node;
    node["feature"] = n.feature;
    node["threshold"] = n.threshold;
    node["left"] = n.left;
    node["right"] = n.right;
    if (n.is_leaf()) {
      if (n.value.size() == 1) {
        node["leaf_value"] = n.value[0];
      } else {
        node["leaf_value"] = n.value;
      }
    } else {
      node["leaf_value"] = nullptr;
    }
    node["cover"] = n.cover;
    nodes.push_back(std::move(node));
  }
  return nodes;
}

inline tree::Tree tree_from_json(const json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::Parse, "tree must be a non-empty array");
  tree::Tree t;
  for (const auto& nj : j) {
    tree::TreeNode n;
    n.feature = nj.at("feature").get<int>();
    n.threshold = nj.at("threshold").get<double>();
    n.left = nj.at("left").get<int>();
    n.right = nj.at("right").get<int>();
    n.cover = nj.at("cover").get<double>();
    const auto& lv = nj.at("leaf_value");
    if (lv.is_number()) {
      n.value = {lv.get<double>()};
    } else if (lv.is_array()) {
      n.value = lv.get<std::vector<double>>();
    }
    t.nodes.push_back(std::move(n));
  }
  return t;
}

inline json model_to_json(const ensemble::Model& m) {
  json out;
  out["family"] = ensemble::to_string(m.family);
  out["params"] = m.params_json.empty() ? json::object() : json::parse(m.params_json);
  out["base_margin"] = m.base_margin;
  out["learning_rate"] = m.learning_rate;
  out["tree_weights"] = m.tree_weights;
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
  out["trees"] = std::move(trees);
  out["schema_fingerprint"] = hex64(m.schema_fingerprint);
  if (m.logistic) {
    json lin;
    lin["weights"] = m.logistic->weights;
    lin["intercept"] = m.logistic->intercept;
    lin["means"] = m.logistic->means;
    lin["scales"] = m.logistic->scales;
    lin["converged"] = m.logistic->converged;
    out["linear"] = std::move(lin);
  }
  return out;
}

inline ensemble::Model model_from_json(const json& j) {
  ensemble::Model m;
  try {
    m.family = ensemble::family_from_string(j.at("family").get<std::string>());
    m.params_json = j.at("params").dump();
    m.base_margin = j.at("base_margin").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.tree_weights = j.at("tree_weights").get<std::vector<double>>();
    for (const auto& tj : j.at("trees")) m.trees.push_back(tree_from_json(tj));
    m.schema_fingerprint =
        std::stoull(j.at("schema_fingerprint").get<std::string>(), nullptr, 16);
    if (j.contains("linear")) {
      linear::LogisticModel lin;
      const auto& lj = j["linear"];
      lin.weights = lj.at("weights").get<std::vector<double>>();
      lin.intercept = lj.at("intercept").get<double>();
      lin.means = lj.at("means").get<std::vector<double>>();
      lin.scales = lj.at("scales").get<std::vector<double>>();
      lin.converged = lj.at("converged").get<bool>();
      m.logistic = std::move(lin);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("malformed model file: ") + e.what());
  }
  if (m.tree_weights.size() != m.trees.size()) {
    fail(ErrorKind::Parse, "tree_weights and trees length mismatch");
  }
  if (m.family == ensemble::Family::Logistic && !m.logistic) {
    fail(ErrorKind::Parse, "logistic model file lacks the 'linear' section");
  }
  return m;
}

// Schema config file: {"label": name, "columns": [{"name", "kind"}, ...]}.
// Category maps are always derived from the data, never from the config.
inline data::FeatureSchema schema_from_json(const json& j) {
  if (!j.is_object() || !j.contains("columns") || !j.contains("label")) {
    fail(ErrorKind::Schema, "schema file must be {\"label\": ..., \"columns\": [...]}");
  }
  data::FeatureSchema schema;
  for (const auto& cj : j["columns"]) {
    data::Column col;
    col.name = cj.at("name").get<std::string>();
    col.kind = data::column_kind_from_string(cj.at("kind").get<std::string>());
    schema.columns.push_back(std::move(col));
  }
  const auto label = j["label"].get<std::string>();
  bool found = false;
  for (std::size_t i = 0; i < schema.columns.size(); ++i) {
    if (schema.columns[i].name == label) {
      schema.label_index = i;
      found = true;
    }
  }
  if (!found) fail(ErrorKind::Schema, "label column '" + label + "' not declared");
  schema.validate();
  return schema;
}

inline data::FeatureSchema load_schema(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("invalid JSON in '") + path + "': " + e.what());
  }
  return schema_from_json(j);
}

inline void save_model(const ensemble::Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << model_to_json(m).dump(2) << "\n";
}

inline ensemble::Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("invalid JSON in '") + path + "': " + e.what());
  }
  return model_from_json(j);
}

}  // namespace osteo::serialize
