#pragma once

// Exploratory summaries: per-feature crosstabs against the label and the
// Pearson correlation matrix over encoded columns plus the label.

#include "osteo/dataset.hpp"

namespace osteo::data {

struct Crosstab {
  std::string feature;
  std::vector<std::string> categories;
  // counts[c][y]: rows with category code c and label y
  std::vector<std::array<std::size_t, 2>> counts;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& cell : counts) n += cell[0] + cell[1];
    return n;
  }
};

inline Crosstab crosstab(const Dataset& d, const std::string& feature) {
  const std::size_t j = d.feature_index(feature);
  if (d.feature_kinds[j] == ColumnKind::Continuous) {
    fail(ErrorKind::Unsupported, "crosstab of continuous feature '" + feature + "'");
  }
  Crosstab out;
  out.feature = feature;
  out.categories = d.feature_categories[j];
  out.counts.assign(out.categories.size(), {0, 0});
  for (std::size_t i = 0; i < d.row_count; ++i) {
    const auto code = static_cast<std::size_t>(d.features[i * d.feature_count + j]);
    out.counts[code][static_cast<std::size_t>(d.labels[i])]++;
  }
  return out;
}

struct CorrelationMatrix {
  std::vector<std::string> columns;          // feature names plus label
  std::vector<std::vector<double>> matrix;   // square, symmetric, unit diagonal
};

// Pearson correlation; zero-variance columns correlate 0 with everything
// and 1 with themselves.
inline CorrelationMatrix correlation_matrix(const Dataset& d) {
  if (d.row_count == 0) fail(ErrorKind::Input, "empty dataset");
  const std::size_t m = d.feature_count + 1;
  const std::size_t n = d.row_count;

  std::vector<std::vector<double>> cols(m, std::vector<double>(n));
  for (std::size_t j = 0; j < d.feature_count; ++j) {
    for (std::size_t i = 0; i < n; ++i) cols[j][i] = d.features[i * d.feature_count + j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    cols[d.feature_count][i] = static_cast<double>(d.labels[i]);
  }

  std::vector<double> mean(m, 0.0), sd(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (double v : cols[j]) s += v;
    mean[j] = s / static_cast<double>(n);
    double ss = 0.0;
    for (double v : cols[j]) ss += (v - mean[j]) * (v - mean[j]);
    sd[j] = std::sqrt(ss);
  }

  CorrelationMatrix out;
  out.columns = d.feature_names;
  out.columns.push_back(d.schema.label().name);
  out.matrix.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a) {
    out.matrix[a][a] = 1.0;
    for (std::size_t b = a + 1; b < m; ++b) {
      double r = 0.0;
      if (sd[a] > 0.0 && sd[b] > 0.0) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          dot += (cols[a][i] - mean[a]) * (cols[b][i] - mean[b]);
        }
        r = dot / (sd[a] * sd[b]);
        r = std::clamp(r, -1.0, 1.0);
      }
      out.matrix[a][b] = r;
      out.matrix[b][a] = r;
    }
  }
  return out;
}

struct EdaReport {
  std::vector<Crosstab> crosstabs;   // all binary/categorical features
  CorrelationMatrix correlation;
};

inline EdaReport eda_report(const Dataset& d) {
  EdaReport out;
  for (std::size_t j = 0; j < d.feature_count; ++j) {
    if (d.feature_kinds[j] != ColumnKind::Continuous) {
      out.crosstabs.push_back(crosstab(d, d.feature_names[j]));
    }
  }
  out.correlation = correlation_matrix(d);
  return out;
}

}  // namespace osteo::data
