// Deterministic generator for the pinned osteoporosis risk dataset.
//
// The upstream Kaggle file cannot be redistributed, so the repository pins a
// reconstruction instead: 1,958 rows whose published per-category label
// counts (hormonal changes, family history, body weight, intakes, lifestyle
// and history columns) are reproduced exactly, and whose joint structure
// keeps the documented behavior of the cohort: age dominates the risk,
// hormonal changes and family history carry most of the remaining signal.
//
// The construction is integer-exact: every (category x label) cell below is
// a hard target, asserted after generation. Only the age values and the
// row/assignment order are sampled, from a fixed default seed.

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osteo/common.hpp"

namespace {

using osteo::Rng;

struct Row {
  int age = 0;
  int label = 0;
  int band = 0;  // 0 young, 1 mid, 2 old
  std::map<std::string, std::string> cells;
};

// Age-band sizes per label.
constexpr int kYoung[2] = {670, 12};
constexpr int kMid[2] = {270, 240};
constexpr int kOld[2] = {39, 727};

// Joint (hormonal, family-history) cells per (label, band); order:
// (h0,f0), (h1,f0), (h0,f1), (h1,f1) with h0 = Normal, f0 = No.
constexpr int kMidHF[2][4] = {{182, 42, 42, 4}, {38, 78, 78, 46}};
constexpr int kYoungHF[2][4] = {{100, 159, 159, 252}, {3, 3, 3, 3}};
constexpr int kOldHF[2][4] = {{6, 9, 9, 15}, {188, 190, 173, 176}};

// Independent columns: exact per-label category counts.
struct IndependentColumn {
  const char* name;
  std::vector<std::pair<const char*, std::array<int, 2>>> counts;  // category -> {n0, n1}
};

const std::vector<IndependentColumn>& independent_columns() {
  static const std::vector<IndependentColumn> cols = {
      {"Gender", {{"Female", {488, 494}}, {"Male", {491, 485}}}},
      {"Race/Ethnicity",
       {{"African American", {327, 325}}, {"Asian", {326, 327}}, {"Caucasian", {326, 327}}}},
      {"Body Weight", {{"Underweight", {531, 496}}, {"Normal", {448, 483}}}},
      {"Calcium Intake", {{"Low", {475, 479}}, {"Adequate", {504, 500}}}},
      {"Vitamin D Intake", {{"Insufficient", {482, 465}}, {"Sufficient", {497, 514}}}},
      {"Physical Activity", {{"Sedentary", {520, 501}}, {"Active", {459, 478}}}},
      {"Smoking", {{"No", {480, 496}}, {"Yes", {499, 483}}}},
      {"Alcohol Consumption", {{"None", {484, 486}}, {"Moderate", {495, 493}}}},
      {"Medical Conditions",
       {{"Hyperthyroidism", {322, 330}}, {"None", {331, 324}}, {"Rheumatoid Arthritis", {326, 325}}}},
      {"Medications", {{"Corticosteroids", {509, 476}}, {"None", {470, 503}}}},
      {"Prior Fractures", {{"No", {492, 489}}, {"Yes", {487, 490}}}},
  };
  return cols;
}

const std::vector<std::string>& header() {
  static const std::vector<std::string> h = {
      "Age", "Gender", "Hormonal Changes", "Family History", "Race/Ethnicity",
      "Body Weight", "Calcium Intake", "Vitamin D Intake", "Physical Activity",
      "Smoking", "Alcohol Consumption", "Medical Conditions", "Medications",
      "Prior Fractures", "Osteoporosis"};
  return h;
}

int sample_age(Rng& rng, int label, int band) {
  const double u = rng.uniform();
  switch (band) {
    case 0:  // young
      return label == 0 ? 18 + static_cast<int>(u * 23.0)   // 18..40
                        : 37 + static_cast<int>(u * 4.0);   // 37..40
    case 1:  // mid, label 0 skews low, label 1 skews high
      return label == 0 ? 41 + static_cast<int>(std::pow(u, 1.5) * 20.0)
                        : 41 + static_cast<int>(std::pow(u, 2.0 / 3.0) * 20.0);
    default:  // old
      return label == 0 ? 61 + static_cast<int>(u * 6.0)    // 61..66
                        : 61 + static_cast<int>(u * 30.0);  // 61..90
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generate the pinned osteoporosis risk CSV"};
  std::string out_path = "data/osteoporosis.csv";
  std::uint64_t seed = 7;
  app.add_option("--out", out_path, "output CSV path");
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  std::vector<Row> rows;
  const char* h_names[2] = {"Normal", "Postmenopausal"};
  const char* f_names[2] = {"No", "Yes"};

  Rng age_rng(seed, 0xa9e);
  for (int label = 0; label < 2; ++label) {
    auto add_band = [&](int band, int count, const int hf[4]) {
      int produced = 0;
      for (int cell = 0; cell < 4; ++cell) {
        const int h = cell & 1;
        const int f = cell >> 1;
        for (int i = 0; i < hf[cell]; ++i) {
          Row r;
          r.label = label;
          r.band = band;
          r.age = sample_age(age_rng, label, band);
          r.cells["Hormonal Changes"] = h_names[h];
          r.cells["Family History"] = f_names[f];
          rows.push_back(std::move(r));
          ++produced;
        }
      }
      if (produced != count) {
        std::fprintf(stderr, "band cell counts do not sum to the band size\n");
        std::exit(1);
      }
    };
    add_band(0, kYoung[label], kYoungHF[label]);
    add_band(1, kMid[label], kMidHF[label]);
    add_band(2, kOld[label], kOldHF[label]);
  }

  // Deal the independent columns per label with exact counts.
  for (const auto& col : independent_columns()) {
    for (int label = 0; label < 2; ++label) {
      std::vector<const char*> deck;
      for (const auto& [category, counts] : col.counts) {
        for (int i = 0; i < counts[static_cast<std::size_t>(label)]; ++i) {
          deck.push_back(category);
        }
      }
      Rng rng(seed, osteo::fnv1a64(col.name) ^ static_cast<std::uint64_t>(label));
      rng.shuffle(deck);
      std::size_t k = 0;
      for (auto& r : rows) {
        if (r.label == label) r.cells[col.name] = deck[k++];
      }
      if (k != deck.size()) {
        std::fprintf(stderr, "deck size mismatch for %s\n", col.name);
        std::exit(1);
      }
    }
  }

  Rng order_rng(seed, 0x0d3);
  order_rng.shuffle(rows);

  // Recount every pinned marginal before writing anything.
  auto count_cell = [&](const std::string& col, const std::string& cat, int label) {
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.label == label && r.cells.at(col) == cat) ++n;
    }
    return n;
  };
  struct Check {
    const char* col;
    const char* cat;
    std::size_t n0, n1;
  };
  const std::vector<Check> checks = {
      {"Hormonal Changes", "Normal", 498, 483},
      {"Family History", "No", 498, 500},
      {"Body Weight", "Underweight", 531, 496},
      {"Calcium Intake", "Low", 475, 479},
      {"Vitamin D Intake", "Insufficient", 482, 465},
      {"Vitamin D Intake", "Sufficient", 497, 514},
      {"Physical Activity", "Sedentary", 520, 501},
      {"Smoking", "No", 480, 496},
      {"Alcohol Consumption", "None", 484, 486},
      {"Medications", "Corticosteroids", 509, 476},
  };
  for (const auto& c : checks) {
    if (count_cell(c.col, c.cat, 0) != c.n0 || count_cell(c.col, c.cat, 1) != c.n1) {
      std::fprintf(stderr, "pinned count violated: %s=%s\n", c.col, c.cat);
      return 1;
    }
  }
  if (rows.size() != 1958) {
    std::fprintf(stderr, "row count %zu != 1958\n", rows.size());
    return 1;
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::fprintf(stderr, "cannot write %s\n", out_path.c_str());
    return 1;
  }
  const auto& cols = header();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << cols[i] << (i + 1 < cols.size() ? "," : "\n");
  }
  for (const auto& r : rows) {
    out << r.age;
    for (std::size_t i = 1; i + 1 < cols.size(); ++i) out << "," << r.cells.at(cols[i]);
    out << "," << r.label << "\n";
  }
  out.close();

  std::ifstream back(out_path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(back)),
                      std::istreambuf_iterator<char>());
  std::cout << out_path << ": " << rows.size() << " rows, checksum fnv1a64:"
            << osteo::hex64(osteo::fnv1a64(content.data(), content.size())) << "\n";
  return 0;
}
