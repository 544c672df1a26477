#ifndef NBSCREEN_DATASET_HPP
#define NBSCREEN_DATASET_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nbscreen/csv.hpp"
#include "nbscreen/errors.hpp"
#include "nbscreen/random.hpp"

namespace nbscreen {

// ---------------------------------------------------------------------------
// Depression levels

/// Ordinal severity class. The numeric values are the 1-based class indices
/// used in files and reports.
enum class Level : std::uint8_t { Normal = 1, Mild, Moderate, Severe, VerySevere };

inline constexpr std::size_t kNumLevels = 5;

inline constexpr std::array<std::string_view, kNumLevels> kLevelNames{
    "Normal", "Mild", "Moderate", "Severe", "VerySevere"};

inline constexpr std::array<Level, kNumLevels> kAllLevels{
    Level::Normal, Level::Mild, Level::Moderate, Level::Severe, Level::VerySevere};

/// 0-based slot of a level in per-class arrays.
constexpr std::size_t slot(Level level) noexcept { return static_cast<std::size_t>(level) - 1; }

constexpr Level level_at(std::size_t slot_index) noexcept {
  return static_cast<Level>(slot_index + 1);
}

constexpr std::string_view name(Level level) noexcept { return kLevelNames[slot(level)]; }

/// Accepts a canonical level name (case-insensitive; spaces, '-' and '_'
/// ignored, so "Very Severe" works) or an integer 1..5.
inline std::optional<Level> parse_level(std::string_view token) {
  token = csv::trim(token);
  if (auto n = csv::parse_int<int>(token)) {
    if (*n >= 1 && *n <= static_cast<int>(kNumLevels)) return static_cast<Level>(*n);
    return std::nullopt;
  }
  std::string compact;
  for (char ch : token)
    if (ch != ' ' && ch != '_' && ch != '-') compact.push_back(ch);
  for (std::size_t i = 0; i < kNumLevels; ++i)
    if (csv::iequals(compact, kLevelNames[i])) return level_at(i);
  return std::nullopt;
}

inline std::vector<std::string> level_labels() { return {kLevelNames.begin(), kLevelNames.end()}; }

using ClassCounts = std::array<std::uint64_t, kNumLevels>;

// ---------------------------------------------------------------------------
// Schema

struct Attribute {
  std::string name;
  std::vector<std::string> vocabulary;

  std::optional<std::size_t> find(std::string_view label) const noexcept {
    for (std::size_t i = 0; i < vocabulary.size(); ++i)
      if (vocabulary[i] == label) return i;
    return std::nullopt;
  }

  bool operator==(const Attribute&) const = default;
};

/// Ordered categorical attributes plus the fixed five-level class.
class Schema {
 public:
  Schema() = default;

  explicit Schema(std::vector<Attribute> attributes, std::string class_attribute = "Class")
      : attributes_(std::move(attributes)), class_attribute_(std::move(class_attribute)) {
    std::set<std::string, std::less<>> names;
    for (const auto& attr : attributes_) {
      if (attr.name.empty()) throw SchemaError("attribute with empty name");
      if (csv::iequals(attr.name, class_attribute_))
        throw SchemaError("attribute '" + attr.name + "' collides with the class attribute");
      if (!names.insert(attr.name).second)
        throw SchemaError("duplicate attribute name '" + attr.name + "'");
      if (attr.vocabulary.empty())
        throw SchemaError("attribute '" + attr.name + "' has an empty vocabulary");
      std::set<std::string_view> labels(attr.vocabulary.begin(), attr.vocabulary.end());
      if (labels.size() != attr.vocabulary.size())
        throw SchemaError("attribute '" + attr.name + "' has duplicate vocabulary labels");
    }
  }

  const std::vector<Attribute>& attributes() const noexcept { return attributes_; }
  const Attribute& attribute(std::size_t i) const { return attributes_.at(i); }
  std::size_t attribute_count() const noexcept { return attributes_.size(); }
  const std::string& class_attribute() const noexcept { return class_attribute_; }

  std::optional<std::size_t> find_attribute(std::string_view attr_name) const noexcept {
    for (std::size_t i = 0; i < attributes_.size(); ++i)
      if (attributes_[i].name == attr_name) return i;
    return std::nullopt;
  }

  bool operator==(const Schema&) const = default;

 private:
  std::vector<Attribute> attributes_;
  std::string class_attribute_ = "Class";
};

// ---------------------------------------------------------------------------
// Dataset

struct Row {
  std::vector<std::size_t> values;  ///< vocabulary index per schema attribute
  Level level = Level::Normal;

  bool operator==(const Row&) const = default;
};

class Dataset {
 public:
  Dataset() = default;

  Dataset(Schema schema, std::vector<Row> rows) : schema_(std::move(schema)), rows_(std::move(rows)) {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const auto& row = rows_[r];
      if (row.values.size() != schema_.attribute_count())
        throw ValueError("row " + std::to_string(r) + ": width " +
                         std::to_string(row.values.size()) + " does not match schema");
      for (std::size_t a = 0; a < row.values.size(); ++a)
        if (row.values[a] >= schema_.attribute(a).vocabulary.size())
          throw ValueError("row " + std::to_string(r) + ": value index out of range for '" +
                           schema_.attribute(a).name + "'");
      if (static_cast<std::size_t>(row.level) < 1 || static_cast<std::size_t>(row.level) > kNumLevels)
        throw ValueError("row " + std::to_string(r) + ": class index out of range");
    }
  }

  const Schema& schema() const noexcept { return schema_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  ClassCounts class_counts() const noexcept {
    ClassCounts counts{};
    for (const auto& row : rows_) ++counts[slot(row.level)];
    return counts;
  }

  /// Rows at the given positions, in the order given.
  Dataset subset(const std::vector<std::size_t>& indices) const {
    std::vector<Row> picked;
    picked.reserve(indices.size());
    for (auto i : indices) picked.push_back(rows_.at(i));
    return Dataset(schema_, std::move(picked));
  }

  bool operator==(const Dataset&) const = default;

 private:
  Schema schema_;
  std::vector<Row> rows_;
};

// ---------------------------------------------------------------------------
// CSV I/O

enum class MissingPolicy { Error, Drop, AsCategory };

struct LoadOptions {
  MissingPolicy missing_policy = MissingPolicy::Error;
  std::string class_column = "Class";
};

/// Empty cells and "NA" (any case) are missing.
inline bool is_missing(std::string_view cell) noexcept {
  return cell.empty() || csv::iequals(cell, "NA");
}

inline constexpr std::string_view kMissingCategory = "NA";

/// Parses a dataset. Vocabularies are built in first-appearance order; the
/// class column is matched case-insensitively by name.
inline Dataset load_csv(std::istream& in, const LoadOptions& options = {}) {
  const auto table = csv::read_table(in);
  const auto class_col = csv::find_column(table.header, options.class_column);
  if (!class_col)
    throw FormatError("header has no class column '" + options.class_column + "'");

  std::vector<Attribute> attributes;
  std::vector<std::size_t> columns;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == *class_col) continue;
    attributes.push_back({table.header[c], {}});
    columns.push_back(c);
  }
  std::vector<std::map<std::string, std::size_t, std::less<>>> lookup(attributes.size());

  std::vector<Row> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    const auto where = "line " + std::to_string(table.line_numbers[r]);

    const auto& class_token = cells[*class_col];
    if (is_missing(class_token)) {
      if (options.missing_policy == MissingPolicy::Drop) continue;
      throw ValueError(where + ": missing class value");
    }
    const auto level = parse_level(class_token);
    if (!level) throw ValueError(where + ": unknown class label '" + class_token + "'");

    bool drop = false;
    Row row{std::vector<std::size_t>(attributes.size()), *level};
    for (std::size_t a = 0; a < attributes.size() && !drop; ++a) {
      std::string_view cell = cells[columns[a]];
      if (is_missing(cell)) {
        switch (options.missing_policy) {
          case MissingPolicy::Error:
            throw ValueError(where + ": missing value for '" + attributes[a].name + "'");
          case MissingPolicy::Drop:
            drop = true;
            continue;
          case MissingPolicy::AsCategory:
            cell = kMissingCategory;
            break;
        }
      }
      auto [it, inserted] = lookup[a].try_emplace(std::string(cell), attributes[a].vocabulary.size());
      if (inserted) attributes[a].vocabulary.emplace_back(cell);
      row.values[a] = it->second;
    }
    if (!drop) rows.push_back(std::move(row));
  }

  // Attributes never observed (header-only or fully dropped input) still need
  // a vocabulary for the schema to be valid.
  if (rows.empty())
    for (auto& attr : attributes)
      if (attr.vocabulary.empty()) attr.vocabulary.emplace_back(kMissingCategory);

  return Dataset(Schema(std::move(attributes), table.header[*class_col]), std::move(rows));
}

/// Canonical writer: attributes in schema order, class column last, rows in
/// dataset order, class written by canonical name.
inline void write_csv(std::ostream& out, const Dataset& ds) {
  const auto& schema = ds.schema();
  for (const auto& attr : schema.attributes()) out << attr.name << ',';
  out << schema.class_attribute() << '\n';
  for (const auto& row : ds.rows()) {
    for (std::size_t a = 0; a < row.values.size(); ++a)
      out << schema.attribute(a).vocabulary[row.values[a]] << ',';
    out << name(row.level) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Contingency tables

/// Per (attribute, value, class) counts. This is Table-I shaped data and the
/// complete sufficient statistic of a categorical Naive Bayes model.
class ContingencyTable {
 public:
  ContingencyTable() = default;

  /// counts[a][v] holds the per-class counts of value v of attribute a.
  ContingencyTable(Schema schema, std::vector<std::vector<ClassCounts>> counts, ClassCounts class_totals)
      : schema_(std::move(schema)), counts_(std::move(counts)), class_totals_(class_totals) {
    if (counts_.size() != schema_.attribute_count())
      throw ArgumentError("contingency counts do not match the schema's attribute count");
    for (std::size_t a = 0; a < counts_.size(); ++a)
      if (counts_[a].size() != schema_.attribute(a).vocabulary.size())
        throw ArgumentError("contingency counts for '" + schema_.attribute(a).name +
                            "' do not match its vocabulary");
  }

  const Schema& schema() const noexcept { return schema_; }
  const ClassCounts& class_totals() const noexcept { return class_totals_; }

  std::uint64_t count(std::size_t attribute, std::size_t value, Level level) const {
    return counts_.at(attribute).at(value)[slot(level)];
  }

  const std::vector<ClassCounts>& counts(std::size_t attribute) const { return counts_.at(attribute); }

  std::uint64_t total() const noexcept {
    std::uint64_t n = 0;
    for (auto t : class_totals_) n += t;
    return n;
  }

  /// Throws ConsistencyError naming the first attribute whose per-class sums
  /// disagree with the class totals.
  void validate() const {
    for (std::size_t a = 0; a < counts_.size(); ++a) {
      ClassCounts sums{};
      for (const auto& per_class : counts_[a])
        for (std::size_t c = 0; c < kNumLevels; ++c) sums[c] += per_class[c];
      if (sums != class_totals_)
        throw ConsistencyError("attribute '" + schema_.attribute(a).name +
                               "': per-class counts do not sum to the class totals");
    }
  }

  bool operator==(const ContingencyTable&) const = default;

 private:
  Schema schema_;
  std::vector<std::vector<ClassCounts>> counts_;
  ClassCounts class_totals_{};
};

/// Counts rows per (attribute, value, class).
inline ContingencyTable contingency(const Dataset& ds) {
  const auto& schema = ds.schema();
  std::vector<std::vector<ClassCounts>> counts(schema.attribute_count());
  for (std::size_t a = 0; a < counts.size(); ++a)
    counts[a].assign(schema.attribute(a).vocabulary.size(), ClassCounts{});
  for (const auto& row : ds.rows())
    for (std::size_t a = 0; a < row.values.size(); ++a) ++counts[a][row.values[a]][slot(row.level)];
  return ContingencyTable(schema, std::move(counts), ds.class_counts());
}

/// Reads the long-form `attribute,value,class,count` file. Attribute and
/// value order follow first appearance; class totals come from the first
/// attribute (call validate() to check the rest).
inline ContingencyTable load_contingency_csv(std::istream& in, std::string class_attribute = "Class") {
  const auto table = csv::read_table(in);
  const auto col_attr = csv::find_column(table.header, "attribute");
  const auto col_value = csv::find_column(table.header, "value");
  const auto col_class = csv::find_column(table.header, "class");
  const auto col_count = csv::find_column(table.header, "count");
  if (!col_attr || !col_value || !col_class || !col_count)
    throw FormatError("contingency file needs columns attribute,value,class,count");

  std::vector<Attribute> attributes;
  std::vector<std::vector<ClassCounts>> counts;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    const auto where = "line " + std::to_string(table.line_numbers[r]);
    const auto level = parse_level(cells[*col_class]);
    if (!level) throw ValueError(where + ": unknown class label '" + cells[*col_class] + "'");
    const auto n = csv::parse_int<std::uint64_t>(cells[*col_count]);
    if (!n) throw FormatError(where + ": count '" + cells[*col_count] + "' is not a non-negative integer");

    std::size_t a = 0;
    while (a < attributes.size() && attributes[a].name != cells[*col_attr]) ++a;
    if (a == attributes.size()) {
      attributes.push_back({cells[*col_attr], {}});
      counts.emplace_back();
    }
    auto v = attributes[a].find(cells[*col_value]);
    if (!v) {
      v = attributes[a].vocabulary.size();
      attributes[a].vocabulary.push_back(cells[*col_value]);
      counts[a].push_back(ClassCounts{});
    }
    counts[a][*v][slot(*level)] += *n;
  }
  if (attributes.empty()) throw FormatError("contingency file has no rows");

  ClassCounts totals{};
  for (const auto& per_class : counts.front())
    for (std::size_t c = 0; c < kNumLevels; ++c) totals[c] += per_class[c];
  return ContingencyTable(Schema(std::move(attributes), std::move(class_attribute)), std::move(counts),
                          totals);
}

inline void write_contingency_csv(std::ostream& out, const ContingencyTable& table) {
  out << "attribute,value,class,count\n";
  const auto& schema = table.schema();
  for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
    const auto& attr = schema.attribute(a);
    for (std::size_t v = 0; v < attr.vocabulary.size(); ++v)
      for (auto level : kAllLevels)
        out << attr.name << ',' << attr.vocabulary[v] << ',' << name(level) << ','
            << table.count(a, v, level) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Splitting and synthesis

/// round-half-up(fraction * n), never above n.
inline std::size_t stratum_train_size(double fraction, std::size_t n) noexcept {
  // The epsilon absorbs representation error such as 0.35 * 10 = 3.4999...
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5 + 1e-9));
  return std::min(k, n);
}

struct SplitIndices {
  std::vector<std::size_t> train;       ///< ascending row positions
  std::vector<std::size_t> validation;  ///< ascending row positions
};

/// Per class (in severity order) the row positions are shuffled with one
/// SplitMix64 stream seeded by `seed`; the first round-half-up(f * n_c)
/// positions go to training.
inline SplitIndices stratified_split_indices(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ArgumentError("train fraction must lie in (0, 1)");

  std::array<std::vector<std::size_t>, kNumLevels> strata;
  for (std::size_t i = 0; i < ds.size(); ++i) strata[slot(ds.rows()[i].level)].push_back(i);

  SplitMix64 rng(seed);
  SplitIndices out;
  for (auto& stratum : strata) {
    fisher_yates(std::span<std::size_t>(stratum), rng);
    const auto k = stratum_train_size(train_fraction, stratum.size());
    out.train.insert(out.train.end(), stratum.begin(), stratum.begin() + static_cast<std::ptrdiff_t>(k));
    out.validation.insert(out.validation.end(), stratum.begin() + static_cast<std::ptrdiff_t>(k),
                          stratum.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  return out;
}

struct Split {
  Dataset train;
  Dataset validation;
};

/// Rows keep their original relative order within each part.
inline Split stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  const auto idx = stratified_split_indices(ds, train_fraction, seed);
  return {ds.subset(idx.train), ds.subset(idx.validation)};
}

/// Builds a row-level dataset whose contingency table is exactly `table`.
/// Rows are grouped by class in severity order; within a class each
/// attribute column is the multiset of its counts, shuffled independently.
inline Dataset synthesize(const ContingencyTable& table, std::uint64_t seed) {
  table.validate();
  const auto& schema = table.schema();
  SplitMix64 rng(seed);

  std::vector<Row> rows;
  rows.reserve(static_cast<std::size_t>(table.total()));
  std::vector<std::size_t> pool;
  for (auto level : kAllLevels) {
    const auto n_c = static_cast<std::size_t>(table.class_totals()[slot(level)]);
    const auto first = rows.size();
    for (std::size_t k = 0; k < n_c; ++k) rows.push_back({std::vector<std::size_t>(schema.attribute_count()), level});
    for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
      pool.clear();
      const auto& per_value = table.counts(a);
      for (std::size_t v = 0; v < per_value.size(); ++v) pool.insert(pool.end(), per_value[v][slot(level)], v);
      fisher_yates(std::span<std::size_t>(pool), rng);
      for (std::size_t k = 0; k < n_c; ++k) rows[first + k].values[a] = pool[k];
    }
  }
  return Dataset(schema, std::move(rows));
}

}  // namespace nbscreen

#endif  // NBSCREEN_DATASET_HPP
