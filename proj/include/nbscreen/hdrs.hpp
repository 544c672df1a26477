#ifndef NBSCREEN_HDRS_HPP
#define NBSCREEN_HDRS_HPP

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nbscreen/csv.hpp"
#include "nbscreen/dataset.hpp"
#include "nbscreen/errors.hpp"

namespace nbscreen::hdrs {

inline constexpr std::size_t kItemCount = 17;

struct Item {
  int id = 0;
  int max_score = 0;
};

/// Inclusive score range mapped to a severity level.
struct Band {
  int lower = 0;
  int upper = 0;
  Level level = Level::Normal;
};

/// Scoring schema for the 17-item Hamilton scale.
class Instrument {
 public:
  /// Throws ValidationError unless there are exactly 17 items and the bands
  /// tile [0, max_total()] in severity order with inclusive edges.
  Instrument(std::vector<Item> items, std::vector<Band> bands) : items_(std::move(items)), bands_(std::move(bands)) {
    if (items_.size() != kItemCount)
      throw ValidationError("instrument needs exactly 17 items, got " + std::to_string(items_.size()));
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (items_[i].id != static_cast<int>(i + 1))
        throw ValidationError("instrument items must be numbered 1..17 in order");
      if (items_[i].max_score < 0) throw ValidationError("item " + std::to_string(i + 1) + " has a negative max");
      max_total_ += items_[i].max_score;
    }
    if (bands_.empty()) throw ValidationError("instrument has no bands");
    int expected_lower = 0;
    for (std::size_t b = 0; b < bands_.size(); ++b) {
      const auto& band = bands_[b];
      if (band.lower != expected_lower || band.upper < band.lower)
        throw ValidationError("bands must partition [0, " + std::to_string(max_total_) + "] without gaps or overlaps");
      if (b > 0 && slot(band.level) <= slot(bands_[b - 1].level))
        throw ValidationError("bands must be listed in increasing severity");
      expected_lower = band.upper + 1;
    }
    if (expected_lower != max_total_ + 1)
      throw ValidationError("bands must end at the maximum total " + std::to_string(max_total_));
  }

  const std::vector<Item>& items() const noexcept { return items_; }
  const std::vector<Band>& bands() const noexcept { return bands_; }
  int max_total() const noexcept { return max_total_; }

 private:
  std::vector<Item> items_;
  std::vector<Band> bands_;
  int max_total_ = 0;
};

/// Conventional HDRS-17 item ranges: items 4, 5, 6, 12, 13, 14, 16 and 17
/// score 0-2, the rest 0-4, for a maximum of 52. The source literature does
/// not fix which items take which range, so this is a convention; load an
/// instrument file to use another one.
inline Instrument default_instrument() {
  std::vector<Item> items;
  for (int id = 1; id <= static_cast<int>(kItemCount); ++id) {
    const bool narrow = id == 4 || id == 5 || id == 6 || id == 12 || id == 13 || id == 14 || id == 16 || id == 17;
    items.push_back({id, narrow ? 2 : 4});
  }
  return Instrument(std::move(items), {{0, 7, Level::Normal},
                                       {8, 12, Level::Mild},
                                       {13, 17, Level::Moderate},
                                       {18, 29, Level::Severe},
                                       {30, 52, Level::VerySevere}});
}

inline Instrument instrument_from_json(const nlohmann::json& doc) {
  try {
    std::vector<Item> items;
    for (const auto& item : doc.at("items")) items.push_back({item.at("id").get<int>(), item.at("max").get<int>()});
    std::vector<Band> bands;
    for (const auto& band : doc.at("bands")) {
      const auto& lv = band.at("level");
      const auto level = lv.is_number_integer() ? parse_level(std::to_string(lv.get<int>()))
                                                : parse_level(lv.get<std::string>());
      if (!level) throw FormatError("instrument band has an unknown level " + lv.dump());
      bands.push_back({band.at("lower").get<int>(), band.at("upper").get<int>(), *level});
    }
    return Instrument(std::move(items), std::move(bands));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed instrument file: ") + e.what());
  }
}

inline Instrument load_instrument(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("instrument file is not valid JSON: ") + e.what());
  }
  return instrument_from_json(doc);
}

struct Response {
  std::vector<int> item_scores;
};

/// Throws ValidationError naming the first offending item.
inline int total_score(const Response& response, const Instrument& instrument) {
  const auto& items = instrument.items();
  if (response.item_scores.size() != items.size())
    throw ValidationError("expected " + std::to_string(items.size()) + " item scores, got " +
                          std::to_string(response.item_scores.size()));
  int total = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const int s = response.item_scores[i];
    if (s < 0 || s > items[i].max_score)
      throw ValidationError("item " + std::to_string(items[i].id) + " scored " + std::to_string(s) +
                            ", allowed 0.." + std::to_string(items[i].max_score));
    total += s;
  }
  return total;
}

inline Level band(int score, const Instrument& instrument) {
  for (const auto& b : instrument.bands())
    if (score >= b.lower && score <= b.upper) return b.level;
  throw RangeError("score " + std::to_string(score) + " outside [0, " + std::to_string(instrument.max_total()) + "]");
}

struct ScoredResponse {
  int total = 0;
  Level level = Level::Normal;

  bool operator==(const ScoredResponse&) const = default;
};

/// Raised by score_batch; carries the 0-based index of the bad response.
class BatchError : public ValidationError {
 public:
  BatchError(std::size_t index, const std::string& what)
      : ValidationError("response " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

inline std::vector<ScoredResponse> score_batch(const std::vector<Response>& responses, const Instrument& instrument) {
  std::vector<ScoredResponse> out;
  out.reserve(responses.size());
  for (std::size_t i = 0; i < responses.size(); ++i) {
    try {
      const int total = total_score(responses[i], instrument);
      out.push_back({total, band(total, instrument)});
    } catch (const ValidationError& e) {
      throw BatchError(i, e.what());
    }
  }
  return out;
}

struct ResponseTable {
  std::vector<std::string> ids;  ///< empty when the file has no id column
  std::vector<Response> responses;
};

/// Response CSV: columns item1..item17 (any order, case-insensitive) plus an
/// optional `id` column.
inline ResponseTable load_responses(std::istream& in) {
  const auto table = csv::read_table(in);
  std::vector<std::size_t> item_cols;
  for (std::size_t i = 1; i <= kItemCount; ++i) {
    const auto col = csv::find_column(table.header, "item" + std::to_string(i));
    if (!col) throw FormatError("response file lacks column item" + std::to_string(i));
    item_cols.push_back(*col);
  }
  const auto id_col = csv::find_column(table.header, "id");

  ResponseTable out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    Response resp;
    for (auto col : item_cols) {
      const auto v = csv::parse_int<int>(table.rows[r][col]);
      if (!v)
        throw FormatError("line " + std::to_string(table.line_numbers[r]) + ": '" + table.rows[r][col] +
                          "' is not an integer item score");
      resp.item_scores.push_back(*v);
    }
    out.responses.push_back(std::move(resp));
    if (id_col) out.ids.push_back(table.rows[r][*id_col]);
  }
  return out;
}

inline void write_scores(std::ostream& out, const ResponseTable& input, const std::vector<ScoredResponse>& scores) {
  const bool with_ids = !input.ids.empty();
  if (with_ids) out << "id,";
  out << "total,level\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (with_ids) out << input.ids[i] << ',';
    out << scores[i].total << ',' << name(scores[i].level) << '\n';
  }
}

}  // namespace nbscreen::hdrs

#endif  // NBSCREEN_HDRS_HPP
