#ifndef NBSCREEN_METRICS_HPP
#define NBSCREEN_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nbscreen/csv.hpp"
#include "nbscreen/errors.hpp"

namespace nbscreen::metrics {

/// K x K counts, rows = actual class, columns = predicted class.
class ConfusionMatrix {
 public:
  ConfusionMatrix(std::vector<std::string> labels, std::vector<std::vector<std::uint64_t>> cells)
      : labels_(std::move(labels)), cells_(std::move(cells)) {
    if (labels_.size() < 2) throw ArgumentError("confusion matrix needs at least 2 classes");
    if (cells_.size() != labels_.size()) throw ArgumentError("confusion matrix row count does not match labels");
    for (const auto& row : cells_) {
      if (row.size() != labels_.size()) throw ArgumentError("confusion matrix is not square");
      for (auto v : row) n_ += v;
    }
    if (n_ == 0) throw ArgumentError("confusion matrix is empty");
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::uint64_t n() const noexcept { return n_; }
  std::uint64_t cell(std::size_t actual, std::size_t predicted) const { return cells_.at(actual).at(predicted); }
  const std::vector<std::vector<std::uint64_t>>& cells() const noexcept { return cells_; }

  std::uint64_t row_sum(std::size_t actual) const {
    std::uint64_t s = 0;
    for (auto v : cells_.at(actual)) s += v;
    return s;
  }

  std::uint64_t col_sum(std::size_t predicted) const {
    std::uint64_t s = 0;
    for (const auto& row : cells_) s += row.at(predicted);
    return s;
  }

  std::uint64_t trace() const noexcept {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < cells_.size(); ++i) s += cells_[i][i];
    return s;
  }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<std::uint64_t>> cells_;
  std::uint64_t n_ = 0;
};

/// Indices are 0-based positions in `labels`.
inline ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                 std::vector<std::string> labels) {
  if (truth.size() != predicted.size()) throw ArgumentError("truth and prediction lists differ in length");
  if (truth.empty()) throw ArgumentError("no predictions to evaluate");
  const auto k = labels.size();
  std::vector<std::vector<std::uint64_t>> cells(k, std::vector<std::uint64_t>(k, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= k || predicted[i] >= k)
      throw ArgumentError("class index out of range at position " + std::to_string(i));
    ++cells[truth[i]][predicted[i]];
  }
  return ConfusionMatrix(std::move(labels), std::move(cells));
}

// ---------------------------------------------------------------------------
// One-vs-rest statistics

/// The four counts for one class treated as "positive".
struct OneVsRest {
  std::uint64_t tp = 0;
  std::uint64_t fn = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;

  std::uint64_t n() const noexcept { return tp + fn + fp + tn; }

  /// From true positives, actual-positive count, predicted-positive count and
  /// the total.
  static OneVsRest from_margins(std::uint64_t tp, std::uint64_t actual, std::uint64_t predicted, std::uint64_t n) {
    if (tp > actual || tp > predicted || actual + predicted - tp > n)
      throw ArgumentError("one-vs-rest margins are inconsistent");
    return {tp, actual - tp, predicted - tp, n - actual - predicted + tp};
  }

  bool operator==(const OneVsRest&) const = default;
};

inline std::vector<OneVsRest> one_vs_rest(const ConfusionMatrix& cm) {
  std::vector<OneVsRest> out;
  out.reserve(cm.size());
  for (std::size_t c = 0; c < cm.size(); ++c)
    out.push_back(OneVsRest::from_margins(cm.cell(c, c), cm.row_sum(c), cm.col_sum(c), cm.n()));
  return out;
}

/// Zero denominators give std::nullopt ("undefined"), never 0 or NaN.
using Metric = std::optional<double>;

inline Metric ratio(std::uint64_t num, std::uint64_t den) noexcept {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

struct ClassMetrics {
  Metric sensitivity;
  Metric specificity;
  Metric precision;  ///< positive predictive value
  Metric npv;
  Metric prevalence;
  Metric detection_rate;
  Metric detection_prevalence;
  Metric balanced_accuracy;

  bool operator==(const ClassMetrics&) const = default;
};

inline ClassMetrics class_metrics(const OneVsRest& s) noexcept {
  ClassMetrics m;
  const auto n = s.n();
  m.sensitivity = ratio(s.tp, s.tp + s.fn);
  m.specificity = ratio(s.tn, s.tn + s.fp);
  m.precision = ratio(s.tp, s.tp + s.fp);
  m.npv = ratio(s.tn, s.tn + s.fn);
  m.prevalence = ratio(s.tp + s.fn, n);
  m.detection_rate = ratio(s.tp, n);
  m.detection_prevalence = ratio(s.tp + s.fp, n);
  if (m.sensitivity && m.specificity) m.balanced_accuracy = (*m.sensitivity + *m.specificity) / 2.0;
  return m;
}

inline std::vector<ClassMetrics> per_class_metrics(std::span<const OneVsRest> stats) {
  std::vector<ClassMetrics> out;
  out.reserve(stats.size());
  for (const auto& s : stats) out.push_back(class_metrics(s));
  return out;
}

inline std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
  const auto stats = one_vs_rest(cm);
  return per_class_metrics(stats);
}

// ---------------------------------------------------------------------------
// Overall agreement

/// trace / n.
inline double overall_accuracy(const ConfusionMatrix& cm) noexcept {
  return static_cast<double>(cm.trace()) / static_cast<double>(cm.n());
}

/// Cohen's kappa, (p_o - p_e) / (1 - p_e) with chance agreement p_e from the
/// row and column margins. Undefined when p_e = 1.
inline Metric cohen_kappa(const ConfusionMatrix& cm) {
  const auto n = static_cast<double>(cm.n());
  long double chance = 0.0L;
  std::uint64_t exact_chance = 0;  // sum of row*col, compared to n^2 exactly
  for (std::size_t c = 0; c < cm.size(); ++c) {
    const auto r = cm.row_sum(c);
    const auto k = cm.col_sum(c);
    exact_chance += r * k;
    chance += static_cast<long double>(r) * static_cast<long double>(k);
  }
  if (exact_chance == cm.n() * cm.n()) return std::nullopt;
  const double pe = static_cast<double>(chance / (static_cast<long double>(n) * n));
  const double po = overall_accuracy(cm);
  return (po - pe) / (1.0 - pe);
}

// ---------------------------------------------------------------------------
// Exact binomial interval

namespace detail {

inline long double log_binomial_pmf(std::uint64_t i, std::uint64_t n, long double log_p, long double log_q) {
  const auto ni = static_cast<long double>(n);
  const auto ii = static_cast<long double>(i);
  return std::lgamma(ni + 1) - std::lgamma(ii + 1) - std::lgamma(ni - ii + 1) + ii * log_p + (ni - ii) * log_q;
}

}  // namespace detail

/// P(X >= k) for X ~ Binomial(n, p), summed term by term.
inline double binomial_upper_tail(double p, std::uint64_t n, std::uint64_t k) {
  if (k == 0) return 1.0;
  if (k > n || p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const long double lp = std::log(static_cast<long double>(p));
  const long double lq = std::log1p(-static_cast<long double>(p));
  long double sum = 0.0L;
  for (std::uint64_t i = k; i <= n; ++i) sum += std::exp(detail::log_binomial_pmf(i, n, lp, lq));
  return static_cast<double>(std::min(sum, 1.0L));
}

/// P(X <= k) for X ~ Binomial(n, p).
inline double binomial_lower_tail(double p, std::uint64_t n, std::uint64_t k) {
  if (k >= n) return 1.0;
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  const long double lp = std::log(static_cast<long double>(p));
  const long double lq = std::log1p(-static_cast<long double>(p));
  long double sum = 0.0L;
  for (std::uint64_t i = 0; i <= k; ++i) sum += std::exp(detail::log_binomial_pmf(i, n, lp, lq));
  return static_cast<double>(std::min(sum, 1.0L));
}

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
  double level = 0.95;

  bool operator==(const Interval&) const = default;
};

/// Clopper-Pearson interval for a binomial proportion. The lower endpoint is
/// the smallest p with P(X >= successes) >= (1 - level) / 2 and the upper is
/// the largest p with P(X <= successes) >= (1 - level) / 2, both found by
/// bisection to below 1e-10. Lower is 0 when successes = 0 and upper is 1
/// when successes = n.
inline Interval accuracy_ci(std::uint64_t successes, std::uint64_t n, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ArgumentError("confidence level must lie in (0, 1)");
  if (n == 0) throw ArgumentError("interval needs at least one trial");
  if (successes > n) throw ArgumentError("successes exceed trials");
  const double tail = (1.0 - level) / 2.0;
  constexpr double kTolerance = 1e-12;

  Interval out{0.0, 1.0, level};
  if (successes > 0) {
    double lo = 0.0, hi = 1.0;
    while (hi - lo > kTolerance) {
      const double mid = 0.5 * (lo + hi);
      (binomial_upper_tail(mid, n, successes) >= tail ? hi : lo) = mid;
    }
    out.lower = hi;
  }
  if (successes < n) {
    double lo = 0.0, hi = 1.0;
    while (hi - lo > kTolerance) {
      const double mid = 0.5 * (lo + hi);
      (binomial_lower_tail(mid, n, successes) >= tail ? lo : hi) = mid;
    }
    out.upper = lo;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report

struct MetricsReport {
  std::vector<std::string> labels;
  std::vector<ClassMetrics> per_class;  ///< parallel to labels
  double accuracy = 0.0;
  Metric kappa;
  Interval accuracy_ci;
};

inline MetricsReport report(const ConfusionMatrix& cm, double level = 0.95) {
  MetricsReport r;
  r.labels = cm.labels();
  r.per_class = per_class_metrics(cm);
  r.accuracy = overall_accuracy(cm);
  r.kappa = cohen_kappa(cm);
  r.accuracy_ci = accuracy_ci(cm.trace(), cm.n(), level);
  return r;
}

inline nlohmann::json metric_json(const Metric& m) { return m ? nlohmann::json(*m) : nlohmann::json(nullptr); }

inline nlohmann::json to_json(const ClassMetrics& m) {
  return {{"sensitivity", metric_json(m.sensitivity)},
          {"specificity", metric_json(m.specificity)},
          {"precision", metric_json(m.precision)},
          {"npv", metric_json(m.npv)},
          {"prevalence", metric_json(m.prevalence)},
          {"detection_rate", metric_json(m.detection_rate)},
          {"detection_prevalence", metric_json(m.detection_prevalence)},
          {"balanced_accuracy", metric_json(m.balanced_accuracy)}};
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t c = 0; c < r.labels.size(); ++c) per_class[r.labels[c]] = to_json(r.per_class[c]);
  return {{"labels", r.labels},
          {"per_class", std::move(per_class)},
          {"accuracy", r.accuracy},
          {"kappa", metric_json(r.kappa)},
          {"accuracy_ci", {{"lower", r.accuracy_ci.lower}, {"upper", r.accuracy_ci.upper}, {"level", r.accuracy_ci.level}}}};
}

inline std::string format_metric(const Metric& m) {
  if (!m) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *m);
  return buf;
}

/// Human-readable aligned table, 4 decimals.
inline void print_table(std::ostream& out, const MetricsReport& r) {
  constexpr int kNameWidth = 22;
  constexpr int kColWidth = 12;
  auto pad = [](std::string s, int width) {
    if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), ' ');
    return s;
  };
  std::string line = std::string(kNameWidth, ' ');
  for (const auto& label : r.labels) line += pad(label, kColWidth);
  out << line << '\n';

  using Field = Metric ClassMetrics::*;
  const std::pair<const char*, Field> rows[] = {
      {"Sensitivity", &ClassMetrics::sensitivity},
      {"Specificity", &ClassMetrics::specificity},
      {"Pos Pred Value", &ClassMetrics::precision},
      {"Neg Pred Value", &ClassMetrics::npv},
      {"Prevalence", &ClassMetrics::prevalence},
      {"Detection Rate", &ClassMetrics::detection_rate},
      {"Detection Prevalence", &ClassMetrics::detection_prevalence},
      {"Balanced Accuracy", &ClassMetrics::balanced_accuracy},
  };
  for (const auto& [title, field] : rows) {
    std::string text = title;
    text.resize(kNameWidth, ' ');
    for (const auto& m : r.per_class) text += pad(format_metric(m.*field), kColWidth);
    out << text << '\n';
  }
  out << '\n'
      << "Accuracy : " << format_metric(r.accuracy) << '\n'
      << "95% CI   : (" << format_metric(r.accuracy_ci.lower) << ", " << format_metric(r.accuracy_ci.upper) << ')';
  if (r.accuracy_ci.level != 0.95) out << " at level " << r.accuracy_ci.level;
  out << '\n' << "Kappa    : " << format_metric(r.kappa) << '\n';
}

// ---------------------------------------------------------------------------
// Files

/// First row holds the predicted labels (its first cell is ignored); each
/// following row is an actual label followed by integer counts.
inline ConfusionMatrix load_confusion_csv(std::istream& in) {
  const auto table = csv::read_table(in);
  if (table.header.size() < 3) throw FormatError("confusion matrix needs at least two label columns");
  std::vector<std::string> labels(table.header.begin() + 1, table.header.end());
  if (table.rows.size() != labels.size())
    throw FormatError("confusion matrix has " + std::to_string(table.rows.size()) + " rows for " +
                      std::to_string(labels.size()) + " labels");
  std::vector<std::vector<std::uint64_t>> cells;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row[0] != labels[r])
      throw FormatError("row " + std::to_string(r + 1) + " label '" + row[0] + "' does not match column '" + labels[r] + "'");
    std::vector<std::uint64_t> counts;
    for (std::size_t c = 1; c < row.size(); ++c) {
      const auto v = csv::parse_int<std::uint64_t>(row[c]);
      if (!v) throw FormatError("line " + std::to_string(table.line_numbers[r]) + ": '" + row[c] + "' is not a count");
      counts.push_back(*v);
    }
    cells.push_back(std::move(counts));
  }
  return ConfusionMatrix(std::move(labels), std::move(cells));
}

inline void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
  out << "actual/predicted";
  for (const auto& l : cm.labels()) out << ',' << l;
  out << '\n';
  for (std::size_t r = 0; r < cm.size(); ++r) {
    out << cm.labels()[r];
    for (std::size_t c = 0; c < cm.size(); ++c) out << ',' << cm.cell(r, c);
    out << '\n';
  }
}

/// Per-class one-vs-rest margins without the off-diagonal cells.
struct OneVsRestTable {
  std::vector<std::string> labels;
  std::vector<OneVsRest> stats;
};

/// Columns class,actual,true_positive,predicted; n is the sum of `actual`,
/// which must equal the sum of `predicted`.
inline OneVsRestTable load_one_vs_rest_csv(std::istream& in) {
  const auto table = csv::read_table(in);
  const auto c_label = csv::find_column(table.header, "class");
  const auto c_actual = csv::find_column(table.header, "actual");
  const auto c_tp = csv::find_column(table.header, "true_positive");
  const auto c_pred = csv::find_column(table.header, "predicted");
  if (!c_label || !c_actual || !c_tp || !c_pred)
    throw FormatError("one-vs-rest file needs columns class,actual,true_positive,predicted");

  struct Margin {
    std::uint64_t actual, tp, predicted;
  };
  std::vector<Margin> margins;
  OneVsRestTable out;
  std::uint64_t n = 0, n_pred = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto field = [&](std::size_t col) {
      const auto v = csv::parse_int<std::uint64_t>(row[col]);
      if (!v) throw FormatError("line " + std::to_string(table.line_numbers[r]) + ": '" + row[col] + "' is not a count");
      return *v;
    };
    margins.push_back({field(*c_actual), field(*c_tp), field(*c_pred)});
    out.labels.push_back(row[*c_label]);
    n += margins.back().actual;
    n_pred += margins.back().predicted;
  }
  if (n != n_pred) throw ConsistencyError("actual and predicted totals differ");
  if (n == 0) throw FormatError("one-vs-rest file has no observations");
  for (const auto& m : margins) out.stats.push_back(OneVsRest::from_margins(m.tp, m.actual, m.predicted, n));
  return out;
}

}  // namespace nbscreen::metrics

#endif  // NBSCREEN_METRICS_HPP
