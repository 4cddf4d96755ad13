#pragma once

// Tabular ingestion: schema-driven CSV loading with deterministic label
// encoding, plus the stratified train/test split.
//
// Encoding rules:
//   * categorical and binary columns are label-encoded; codes follow the
//     lexicographic order of the category strings observed in the file
//   * empty cells in categorical/binary columns map to a dedicated
//     "missing" category appended after the lexicographic codes
//   * continuous columns are parsed as doubles and must be finite

#include <array>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "osteo/common.hpp"

namespace osteo::data {

enum class ColumnKind { Binary, Categorical, Continuous };

inline const char* to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::Binary: return "binary";
    case ColumnKind::Categorical: return "categorical";
    case ColumnKind::Continuous: return "continuous";
  }
  return "?";
}

inline ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "binary") return ColumnKind::Binary;
  if (s == "categorical") return ColumnKind::Categorical;
  if (s == "continuous") return ColumnKind::Continuous;
  fail(ErrorKind::Schema, "unknown column kind '" + s + "'");
}

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  // code -> category name; empty for continuous columns.
  std::vector<std::string> categories;

  std::optional<int> code_of(const std::string& category) const {
    for (std::size_t c = 0; c < categories.size(); ++c) {
      if (categories[c] == category) return static_cast<int>(c);
    }
    return std::nullopt;
  }
};

struct FeatureSchema {
  std::vector<Column> columns;   // declared order, label included
  std::size_t label_index = 0;

  const Column& label() const { return columns[label_index]; }

  // Feature columns in declared order (label excluded).
  std::vector<std::size_t> feature_columns() const {
    std::vector<std::size_t> out;
    out.reserve(columns.size() - 1);
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i != label_index) out.push_back(i);
    }
    return out;
  }

  std::uint64_t fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& col : columns) {
      h = fnv1a64(col.name, h);
      h = fnv1a64(to_string(col.kind), h);
      for (const auto& cat : col.categories) h = fnv1a64(cat, h);
      h = fnv1a64("|", h);
    }
    h = fnv1a64(columns[label_index].name, h);
    return h;
  }

  void validate() const {
    if (columns.empty()) fail(ErrorKind::Schema, "schema has no columns");
    std::set<std::string> names;
    for (const auto& c : columns) {
      if (c.name.empty()) fail(ErrorKind::Schema, "empty column name");
      if (!names.insert(c.name).second) {
        fail(ErrorKind::Schema, "duplicate column name '" + c.name + "'");
      }
    }
    if (label_index >= columns.size()) {
      fail(ErrorKind::Schema, "label index out of range");
    }
    if (columns[label_index].kind != ColumnKind::Binary) {
      fail(ErrorKind::Schema, "label column must be binary");
    }
  }
};

// Encoded dataset. `features` is row-major with one column per non-label
// schema column, in declared order. Immutable after construction; safe to
// share across threads.
struct Dataset {
  std::vector<double> features;
  std::vector<int> labels;
  FeatureSchema schema;
  std::size_t row_count = 0;
  std::size_t feature_count = 0;
  std::vector<std::string> feature_names;  // parallel to feature columns
  std::vector<ColumnKind> feature_kinds;
  // For categorical features: code -> name; empty vector for continuous.
  std::vector<std::vector<std::string>> feature_categories;

  MatrixView matrix() const { return {features.data(), row_count, feature_count}; }

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * feature_count, feature_count};
  }

  std::size_t feature_index(const std::string& name) const {
    for (std::size_t j = 0; j < feature_names.size(); ++j) {
      if (feature_names[j] == name) return j;
    }
    fail(ErrorKind::Schema, "unknown feature '" + name + "'");
  }

  std::array<std::size_t, 2> class_counts() const {
    std::array<std::size_t, 2> n{0, 0};
    for (int y : labels) n[static_cast<std::size_t>(y)]++;
    return n;
  }

  Dataset subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.schema = schema;
    out.feature_names = feature_names;
    out.feature_kinds = feature_kinds;
    out.feature_categories = feature_categories;
    out.feature_count = feature_count;
    out.row_count = rows.size();
    out.features.reserve(rows.size() * feature_count);
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) {
      const auto src = row(r);
      out.features.insert(out.features.end(), src.begin(), src.end());
      out.labels.push_back(labels[r]);
    }
    return out;
  }
};

namespace detail {

// Minimal RFC-4180 style reader: quoted fields, doubled quotes, CR/LF
// tolerant. Returns one record per row including the header.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  std::size_t i = 0;
  // Strip a UTF-8 BOM if present.
  if (text.size() >= 3 && text.compare(0, 3, "\xef\xbb\xbf") == 0) i = 3;
  auto end_field = [&] {
    record.push_back(field);
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    records.push_back(record);
    record.clear();
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_record();
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) fail(ErrorKind::Parse, "unterminated quoted field");
  if (!field.empty() || !record.empty()) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    end_record();
  }
  // Drop fully empty trailing lines.
  while (!records.empty() && records.back().size() == 1 && records.back()[0].empty()) {
    records.pop_back();
  }
  return records;
}

inline double parse_double(const std::string& cell, std::size_t row,
                           const std::string& column) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last || !std::isfinite(value)) {
    fail(ErrorKind::Parse, "cannot parse '" + cell + "' as a number (row " +
                               std::to_string(row) + ", column " + column + ")");
  }
  return value;
}

}  // namespace detail

inline const std::string kMissingCategory = "missing";

// Loads and encodes a CSV against a declared schema. The header must contain
// exactly the schema's column names (any order).
inline Dataset load_csv_text(const std::string& text, FeatureSchema schema) {
  schema.validate();
  const auto records = detail::parse_csv(text);
  if (records.empty()) fail(ErrorKind::Parse, "empty CSV");
  const auto& header = records[0];

  // Map schema columns to file positions, order-insensitive.
  std::vector<std::size_t> file_pos(schema.columns.size());
  {
    std::map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (!by_name.emplace(header[i], i).second) {
        fail(ErrorKind::Schema, "duplicate header column '" + header[i] + "'");
      }
    }
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      auto it = by_name.find(schema.columns[c].name);
      if (it == by_name.end()) {
        fail(ErrorKind::Schema,
             "schema column '" + schema.columns[c].name + "' not in CSV header");
      }
      file_pos[c] = it->second;
      by_name.erase(it);
    }
    if (!by_name.empty()) {
      fail(ErrorKind::Schema,
           "unknown column '" + by_name.begin()->first + "' in CSV header");
    }
  }

  const std::size_t n_rows = records.size() - 1;
  if (n_rows == 0) fail(ErrorKind::Parse, "CSV has a header but no rows");

  // First pass: collect category sets for non-continuous columns.
  std::vector<std::set<std::string>> observed(schema.columns.size());
  std::vector<bool> has_missing(schema.columns.size(), false);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      fail(ErrorKind::Parse, "row " + std::to_string(r) + " has " +
                                 std::to_string(records[r].size()) +
                                 " fields, expected " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      if (schema.columns[c].kind == ColumnKind::Continuous) continue;
      const std::string& cell = records[r][file_pos[c]];
      if (cell.empty()) {
        has_missing[c] = true;
      } else {
        observed[c].insert(cell);
      }
    }
  }

  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    auto& col = schema.columns[c];
    if (col.kind == ColumnKind::Continuous) continue;
    col.categories.assign(observed[c].begin(), observed[c].end());  // lexicographic
    if (has_missing[c]) {
      if (observed[c].count(kMissingCategory)) {
        fail(ErrorKind::Parse, "column '" + col.name +
                                   "' mixes empty cells with a literal '" +
                                   kMissingCategory + "' category");
      }
      col.categories.push_back(kMissingCategory);
    }
    const std::size_t limit = col.kind == ColumnKind::Binary ? 2 : observed[c].size();
    if (observed[c].size() > limit) {
      fail(ErrorKind::Schema, "binary column '" + col.name + "' has " +
                                  std::to_string(observed[c].size()) + " categories");
    }
  }
  {
    const auto& label = schema.columns[schema.label_index];
    if (has_missing[schema.label_index]) {
      fail(ErrorKind::Parse, "label column has empty cells");
    }
    if (label.categories.size() != 2) {
      fail(ErrorKind::Schema, "label column must have exactly 2 categories, got " +
                                  std::to_string(label.categories.size()));
    }
  }

  Dataset d;
  d.schema = schema;
  d.row_count = n_rows;
  const auto feat_cols = schema.feature_columns();
  d.feature_count = feat_cols.size();
  d.feature_names.reserve(feat_cols.size());
  for (std::size_t c : feat_cols) {
    d.feature_names.push_back(schema.columns[c].name);
    d.feature_kinds.push_back(schema.columns[c].kind);
    d.feature_categories.push_back(schema.columns[c].categories);
  }
  d.features.resize(n_rows * d.feature_count);
  d.labels.resize(n_rows);

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    for (std::size_t j = 0; j < feat_cols.size(); ++j) {
      const auto& col = schema.columns[feat_cols[j]];
      const std::string& cell = rec[file_pos[feat_cols[j]]];
      double v = 0.0;
      if (col.kind == ColumnKind::Continuous) {
        v = detail::parse_double(cell, r, col.name);
      } else {
        const auto code = col.code_of(cell.empty() ? kMissingCategory : cell);
        v = static_cast<double>(*code);
      }
      d.features[(r - 1) * d.feature_count + j] = v;
    }
    const auto& label_col = schema.columns[schema.label_index];
    const auto code = label_col.code_of(rec[file_pos[schema.label_index]]);
    d.labels[r - 1] = static_cast<int>(*code);
  }
  return d;
}

inline Dataset load_csv(const std::string& path, FeatureSchema schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorKind::Io, "error reading '" + path + "'");
  return load_csv_text(buf.str(), std::move(schema));
}

// ---------------------------------------------------------------------------
// Stratified 80/20-style split.

struct SplitPair {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
  std::vector<std::size_t> test_rows;   // indices into the source dataset
  std::vector<std::size_t> train_rows;
};

// Per-class sampling without replacement; test count per class is
// round-half-up(fraction * class size), capped so each class keeps at least
// one training row.
inline SplitPair stratified_split(const Dataset& d, double test_fraction,
                                  std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    fail(ErrorKind::Input, "test_fraction must be in (0,1)");
  }
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < d.row_count; ++i) {
    by_class[static_cast<std::size_t>(d.labels[i])].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[static_cast<std::size_t>(c)].size() < 2) {
      fail(ErrorKind::Stratification,
           "class " + std::to_string(c) + " has fewer than 2 rows");
    }
  }

  std::vector<std::size_t> test_rows;
  for (int c = 0; c < 2; ++c) {
    auto& rows = by_class[static_cast<std::size_t>(c)];
    Rng rng(seed, static_cast<std::uint64_t>(c) + 101);
    rng.shuffle(rows);
    const double want = test_fraction * static_cast<double>(rows.size());
    std::size_t k = static_cast<std::size_t>(std::floor(want + 0.5));
    k = std::min(k, rows.size() - 1);
    test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + static_cast<long>(k));
  }
  std::sort(test_rows.begin(), test_rows.end());

  std::vector<std::size_t> train_rows;
  train_rows.reserve(d.row_count - test_rows.size());
  std::size_t t = 0;
  for (std::size_t i = 0; i < d.row_count; ++i) {
    if (t < test_rows.size() && test_rows[t] == i) {
      ++t;
    } else {
      train_rows.push_back(i);
    }
  }

  SplitPair out;
  out.train = d.subset(train_rows);
  out.test = d.subset(test_rows);
  out.seed = seed;
  out.test_fraction = test_fraction;
  out.test_rows = std::move(test_rows);
  out.train_rows = std::move(train_rows);
  return out;
}

}  // namespace osteo::data
