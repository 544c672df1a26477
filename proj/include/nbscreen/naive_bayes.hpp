#ifndef NBSCREEN_NAIVE_BAYES_HPP
#define NBSCREEN_NAIVE_BAYES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nbscreen/csv.hpp"
#include "nbscreen/dataset.hpp"
#include "nbscreen/errors.hpp"

namespace nbscreen {

/// Exact ratio of two counts.
struct Ratio {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;
};

/// Categorical Naive Bayes model stored as raw counts. Probabilities are
/// derived on demand:
///
///   prior(c)          = n(c) / N
///   conditional(a,v,c) = (n(a=v, c) + alpha) / (n(c) + alpha * V_a)
///
/// so alpha = 0 gives the unsmoothed maximum-likelihood estimate and the
/// smoothing can be changed without retraining.
class NBModel {
 public:
  /// value_counts is indexed [attribute][class][value].
  using ValueCounts = std::vector<std::vector<std::vector<std::uint64_t>>>;

  NBModel(std::vector<Attribute> attributes, std::vector<std::string> class_labels,
          std::vector<std::uint64_t> class_counts, ValueCounts value_counts, double alpha,
          std::string class_attribute = "Class")
      : attributes_(std::move(attributes)),
        class_labels_(std::move(class_labels)),
        class_counts_(std::move(class_counts)),
        value_counts_(std::move(value_counts)),
        alpha_(alpha),
        class_attribute_(std::move(class_attribute)) {
    if (!std::isfinite(alpha_) || alpha_ < 0.0) throw ArgumentError("smoothing alpha must be finite and >= 0");
    if (class_labels_.empty()) throw ArgumentError("model needs at least one class");
    if (class_counts_.size() != class_labels_.size())
      throw ArgumentError("class counts do not match class labels");
    for (auto n : class_counts_) total_ += n;
    if (total_ == 0) throw ArgumentError("empty dataset");
    if (value_counts_.size() != attributes_.size())
      throw ArgumentError("value counts do not match attribute count");
    for (std::size_t a = 0; a < attributes_.size(); ++a) {
      if (attributes_[a].vocabulary.empty())
        throw SchemaError("attribute '" + attributes_[a].name + "' has an empty vocabulary");
      if (value_counts_[a].size() != class_labels_.size())
        throw ArgumentError("attribute '" + attributes_[a].name + "' lacks per-class counts");
      for (std::size_t c = 0; c < class_labels_.size(); ++c) {
        const auto& row = value_counts_[a][c];
        if (row.size() != attributes_[a].vocabulary.size())
          throw ArgumentError("attribute '" + attributes_[a].name + "' counts do not match its vocabulary");
        std::uint64_t sum = 0;
        for (auto n : row) sum += n;
        if (sum != class_counts_[c])
          throw ConsistencyError("attribute '" + attributes_[a].name + "': counts for class '" + class_labels_[c] +
                                 "' do not sum to the class count");
      }
    }
  }

  const std::vector<Attribute>& attributes() const noexcept { return attributes_; }
  const std::vector<std::string>& class_labels() const noexcept { return class_labels_; }
  const std::vector<std::uint64_t>& class_counts() const noexcept { return class_counts_; }
  const ValueCounts& value_counts() const noexcept { return value_counts_; }
  const std::string& class_attribute() const noexcept { return class_attribute_; }
  std::size_t class_count() const noexcept { return class_labels_.size(); }
  std::uint64_t total() const noexcept { return total_; }
  double alpha() const noexcept { return alpha_; }

  std::uint64_t value_count(std::size_t attribute, std::size_t value, std::size_t klass) const {
    return value_counts_.at(attribute).at(klass).at(value);
  }

  std::optional<std::size_t> find_attribute(std::string_view attr_name) const noexcept {
    for (std::size_t i = 0; i < attributes_.size(); ++i)
      if (attributes_[i].name == attr_name) return i;
    return std::nullopt;
  }

  /// Same counts, different smoothing.
  NBModel with_alpha(double alpha) const {
    return NBModel(attributes_, class_labels_, class_counts_, value_counts_, alpha, class_attribute_);
  }

  double prior(std::size_t klass) const {
    return static_cast<double>(class_counts_.at(klass)) / static_cast<double>(total_);
  }

  Ratio prior_exact(std::size_t klass) const { return {class_counts_.at(klass), total_}; }

  /// Smoothed P(attribute = value | class). Zero when the class has no rows
  /// and alpha is 0.
  double conditional(std::size_t attribute, std::size_t value, std::size_t klass) const {
    const double den = static_cast<double>(class_counts_.at(klass)) +
                       alpha_ * static_cast<double>(attributes_.at(attribute).vocabulary.size());
    if (den == 0.0) return 0.0;
    return (static_cast<double>(value_count(attribute, value, klass)) + alpha_) / den;
  }

  /// Probability given to a value outside the training vocabulary: one extra
  /// pseudo-value, alpha / (n(c) + alpha * (V_a + 1)). Requires alpha > 0.
  double unseen_conditional(std::size_t attribute, std::size_t klass) const {
    const double den = static_cast<double>(class_counts_.at(klass)) +
                       alpha_ * static_cast<double>(attributes_.at(attribute).vocabulary.size() + 1);
    return den == 0.0 ? 0.0 : alpha_ / den;
  }

  /// The unsmoothed conditional as an exact count ratio. Only meaningful for
  /// alpha = 0, where it is exactly what conditional() approximates.
  Ratio conditional_exact(std::size_t attribute, std::size_t value, std::size_t klass) const {
    if (alpha_ != 0.0) throw ArgumentError("exact conditionals are defined only for alpha = 0");
    return {value_count(attribute, value, klass), class_counts_.at(klass)};
  }

  bool operator==(const NBModel&) const = default;

 private:
  std::vector<Attribute> attributes_;
  std::vector<std::string> class_labels_;
  std::vector<std::uint64_t> class_counts_;
  ValueCounts value_counts_;
  double alpha_ = 1.0;
  std::string class_attribute_;
  std::uint64_t total_ = 0;
};

namespace detail {

inline NBModel::ValueCounts zero_counts(const Schema& schema) {
  NBModel::ValueCounts counts(schema.attribute_count());
  for (std::size_t a = 0; a < counts.size(); ++a)
    counts[a].assign(kNumLevels, std::vector<std::uint64_t>(schema.attribute(a).vocabulary.size(), 0));
  return counts;
}

}  // namespace detail

/// Wraps a contingency table as a model; the table alone fully determines it.
inline NBModel fit_from_counts(const ContingencyTable& table, double alpha) {
  table.validate();
  const auto& schema = table.schema();
  auto counts = detail::zero_counts(schema);
  for (std::size_t a = 0; a < schema.attribute_count(); ++a)
    for (std::size_t v = 0; v < schema.attribute(a).vocabulary.size(); ++v)
      for (std::size_t c = 0; c < kNumLevels; ++c) counts[a][c][v] = table.counts(a)[v][c];
  const auto& totals = table.class_totals();
  return NBModel(schema.attributes(), level_labels(), {totals.begin(), totals.end()}, std::move(counts),
                 alpha, schema.class_attribute());
}

/// Counts the rows directly (not through contingency()).
inline NBModel fit(const Dataset& ds, double alpha) {
  if (ds.empty()) throw ArgumentError("empty dataset");
  const auto& schema = ds.schema();
  auto counts = detail::zero_counts(schema);
  std::vector<std::uint64_t> class_counts(kNumLevels, 0);
  for (const auto& row : ds.rows()) {
    const auto c = slot(row.level);
    ++class_counts[c];
    for (std::size_t a = 0; a < row.values.size(); ++a) ++counts[a][c][row.values[a]];
  }
  return NBModel(schema.attributes(), level_labels(), std::move(class_counts), std::move(counts), alpha,
                 schema.class_attribute());
}

// ---------------------------------------------------------------------------
// Posteriors

/// Attribute name -> category label. Attributes left out are marginalized.
using Evidence = std::map<std::string, std::string, std::less<>>;

struct PosteriorVector {
  std::vector<double> log_scores;     ///< log prior + sum of log conditionals
  std::vector<double> probabilities;  ///< normalized posterior
  /// Every class scored -inf (alpha = 0 only); probabilities are the priors.
  bool degenerate = false;
  std::vector<std::string> warnings;
};

/// Per-attribute evidence resolved against the vocabulary. Slots may be
/// unset (missing attribute); a value equal to the vocabulary size means
/// "not in the vocabulary".
using EncodedEvidence = std::vector<std::optional<std::size_t>>;

inline EncodedEvidence encode(const NBModel& model, const Evidence& evidence) {
  EncodedEvidence out(model.attributes().size());
  for (const auto& [attr_name, label] : evidence) {
    const auto a = model.find_attribute(attr_name);
    if (!a) throw SchemaError("attribute '" + attr_name + "' is not in the model");
    const auto& attr = model.attributes()[*a];
    out[*a] = attr.find(label).value_or(attr.vocabulary.size());
  }
  return out;
}

/// Turns log-scores into probabilities by subtracting the max before
/// exponentiating. Returns false when every score is -inf.
inline bool normalize_log_scores(std::span<const double> log_scores, std::span<double> out) noexcept {
  double top = -std::numeric_limits<double>::infinity();
  for (double s : log_scores) top = std::max(top, s);
  if (top == -std::numeric_limits<double>::infinity()) return false;
  double sum = 0.0;
  for (std::size_t c = 0; c < log_scores.size(); ++c) {
    out[c] = std::exp(log_scores[c] - top);
    sum += out[c];
  }
  for (auto& p : out) p /= sum;
  return true;
}

inline PosteriorVector log_posterior(const NBModel& model, const EncodedEvidence& evidence) {
  const auto k = model.class_count();
  const auto& attrs = model.attributes();
  if (evidence.size() != attrs.size()) throw ArgumentError("encoded evidence width does not match the model");

  PosteriorVector post;
  post.log_scores.resize(k);
  post.probabilities.resize(k);
  for (std::size_t c = 0; c < k; ++c) post.log_scores[c] = std::log(model.prior(c));

  for (std::size_t a = 0; a < attrs.size(); ++a) {
    if (!evidence[a]) continue;
    const auto v = *evidence[a];
    if (v >= attrs[a].vocabulary.size()) {
      if (model.alpha() == 0.0) {
        post.warnings.push_back("unseen value for '" + attrs[a].name + "' skipped (alpha = 0)");
        continue;
      }
      for (std::size_t c = 0; c < k; ++c) post.log_scores[c] += std::log(model.unseen_conditional(a, c));
      continue;
    }
    for (std::size_t c = 0; c < k; ++c) post.log_scores[c] += std::log(model.conditional(a, v, c));
  }

  if (!normalize_log_scores(post.log_scores, post.probabilities)) {
    post.degenerate = true;
    post.warnings.push_back("all classes have zero likelihood; falling back to priors");
    for (std::size_t c = 0; c < k; ++c) post.probabilities[c] = model.prior(c);
  }
  return post;
}

inline PosteriorVector log_posterior(const NBModel& model, const Evidence& evidence) {
  return log_posterior(model, encode(model, evidence));
}

struct Prediction {
  std::size_t klass = 0;  ///< 0-based index into model.class_labels()
  PosteriorVector posterior;
};

/// Argmax of the posterior. Ties go to the larger prior, then the lower
/// class index.
inline std::size_t argmax_class(const NBModel& model, std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best] ||
        (scores[c] == scores[best] && model.class_counts()[c] > model.class_counts()[best]))
      best = c;
  }
  return best;
}

inline Prediction predict(const NBModel& model, const EncodedEvidence& evidence) {
  Prediction out{0, log_posterior(model, evidence)};
  out.klass = argmax_class(model, out.posterior.degenerate ? std::span<const double>(out.posterior.probabilities)
                                                           : std::span<const double>(out.posterior.log_scores));
  return out;
}

inline Prediction predict(const NBModel& model, const Evidence& evidence) {
  return predict(model, encode(model, evidence));
}

// ---------------------------------------------------------------------------
// Model file

inline constexpr std::string_view kModelVersion = "1";

/// Canonical JSON: keys sorted, integer counts, alpha as shortest
/// round-trip decimal text. Byte-identical for equal models.
inline std::string save_model(const NBModel& model) {
  nlohmann::json doc;
  doc["version"] = kModelVersion;
  doc["alpha"] = csv::format_double(model.alpha());
  doc["class_attribute"] = model.class_attribute();
  doc["class_labels"] = model.class_labels();
  doc["class_counts"] = model.class_counts();
  auto attrs = nlohmann::json::array();
  for (std::size_t a = 0; a < model.attributes().size(); ++a) {
    const auto& attr = model.attributes()[a];
    attrs.push_back({{"name", attr.name}, {"vocabulary", attr.vocabulary}, {"counts", model.value_counts()[a]}});
  }
  doc["attributes"] = std::move(attrs);
  return doc.dump(2) + "\n";
}

inline NBModel load_model(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    const auto version = doc.at("version").get<std::string>();
    if (version != kModelVersion)
      throw VersionError("model file version '" + version + "' is not supported (expected '" +
                         std::string(kModelVersion) + "')");
    const auto alpha_text = doc.at("alpha").get<std::string>();
    const auto alpha = csv::parse_double(alpha_text);
    if (!alpha) throw FormatError("model alpha '" + alpha_text + "' is not a decimal number");

    std::vector<Attribute> attributes;
    NBModel::ValueCounts counts;
    for (const auto& attr : doc.at("attributes")) {
      attributes.push_back({attr.at("name").get<std::string>(), attr.at("vocabulary").get<std::vector<std::string>>()});
      counts.push_back(attr.at("counts").get<std::vector<std::vector<std::uint64_t>>>());
    }
    return NBModel(std::move(attributes), doc.at("class_labels").get<std::vector<std::string>>(),
                   doc.at("class_counts").get<std::vector<std::uint64_t>>(), std::move(counts), *alpha,
                   doc.value("class_attribute", std::string("Class")));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
}

inline NBModel load_model(std::istream& in) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return load_model(std::string_view(text));
}

}  // namespace nbscreen

#endif  // NBSCREEN_NAIVE_BAYES_HPP
