#pragma once

#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "nbscreen/dataset.hpp"
#include "nbscreen/metrics.hpp"

namespace nbscreen::test {

inline std::string data_path(std::string_view file) { return std::string(NBSCREEN_DATA_DIR) + "/" + std::string(file); }

inline std::ifstream open_fixture(std::string_view file) {
  std::ifstream in(data_path(file));
  if (!in) throw std::runtime_error("missing fixture " + std::string(file));
  return in;
}

inline ContingencyTable table1() {
  auto in = open_fixture("table1_contingency.csv");
  return load_contingency_csv(in);
}

inline metrics::ConfusionMatrix table2() {
  auto in = open_fixture("table2_confusion.csv");
  return metrics::load_confusion_csv(in);
}

inline metrics::OneVsRestTable table3() {
  auto in = open_fixture("table3_one_vs_rest.csv");
  return metrics::load_one_vs_rest_csv(in);
}

/// Published per-class figures: metric name -> one value per class.
inline std::map<std::string, std::vector<double>> table3_published() {
  auto in = open_fixture("table3_published.csv");
  const auto t = csv::read_table(in);
  std::map<std::string, std::vector<double>> out;
  for (const auto& row : t.rows) {
    auto& values = out[row[0]];
    for (std::size_t c = 1; c < row.size(); ++c) values.push_back(*csv::parse_double(row[c]));
  }
  return out;
}

inline metrics::Metric metric_by_name(const metrics::ClassMetrics& m, const std::string& name) {
  if (name == "sensitivity") return m.sensitivity;
  if (name == "specificity") return m.specificity;
  if (name == "precision") return m.precision;
  if (name == "npv") return m.npv;
  if (name == "prevalence") return m.prevalence;
  if (name == "detection_rate") return m.detection_rate;
  if (name == "detection_prevalence") return m.detection_prevalence;
  if (name == "balanced_accuracy") return m.balanced_accuracy;
  throw std::invalid_argument("unknown metric " + name);
}

/// Label-keyed view of a contingency table, independent of vocabulary order.
using LabelledCounts = std::map<std::tuple<std::string, std::string, int>, std::uint64_t>;

inline LabelledCounts labelled(const ContingencyTable& t) {
  LabelledCounts out;
  for (std::size_t a = 0; a < t.schema().attribute_count(); ++a) {
    const auto& attr = t.schema().attribute(a);
    for (std::size_t v = 0; v < attr.vocabulary.size(); ++v)
      for (auto level : kAllLevels)
        if (auto n = t.count(a, v, level)) out[{attr.name, attr.vocabulary[v], static_cast<int>(level)}] = n;
  }
  return out;
}

inline Dataset parse_dataset(const std::string& text, const LoadOptions& options = {}) {
  std::istringstream in(text);
  return load_csv(in, options);
}

inline std::string to_csv(const Dataset& ds) {
  std::ostringstream out;
  write_csv(out, ds);
  return out.str();
}

/// Random CSV-born dataset: `attrs` attributes with 2..max_vocab labels each,
/// every label observed at least once when rows allow it.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t attrs, std::size_t max_vocab, std::size_t rows) {
  std::uniform_int_distribution<std::size_t> vocab_size(2, max_vocab);
  std::vector<std::size_t> vocab(attrs);
  for (auto& v : vocab) v = vocab_size(rng);

  std::ostringstream csv;
  for (std::size_t a = 0; a < attrs; ++a) csv << "attr" << a << ',';
  csv << "Class\n";
  std::uniform_int_distribution<int> level(1, 5);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t a = 0; a < attrs; ++a) {
      // The first rows cycle through every label so all categories occur.
      const auto v = r < vocab[a] ? r : std::uniform_int_distribution<std::size_t>(0, vocab[a] - 1)(rng);
      csv << "v" << v << ',';
    }
    csv << (r < 2 ? static_cast<int>(r) + 1 : level(rng)) << '\n';
  }
  return parse_dataset(csv.str());
}

}  // namespace nbscreen::test
