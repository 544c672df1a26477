#ifndef NBSCREEN_MCA_HPP
#define NBSCREEN_MCA_HPP

#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "nbscreen/csv.hpp"
#include "nbscreen/dataset.hpp"
#include "nbscreen/errors.hpp"
#include "nbscreen/svd.hpp"

namespace nbscreen::mca {

/// One indicator column: a (variable, category) pair.
struct Category {
  std::string attribute;
  std::string value;

  bool operator==(const Category&) const = default;
};

/// Columns of the complete disjunctive table. The class, when included, is
/// treated as one more active variable with the five level names.
inline std::vector<Category> indicator_labels(const Dataset& ds, bool include_class) {
  std::vector<Category> labels;
  for (const auto& attr : ds.schema().attributes())
    for (const auto& v : attr.vocabulary) labels.push_back({attr.name, v});
  if (include_class)
    for (auto l : kLevelNames) labels.push_back({ds.schema().class_attribute(), std::string(l)});
  return labels;
}

/// n x J 0/1 matrix with exactly Q ones per row, one column per vocabulary
/// entry (including categories that never occur).
inline linalg::Matrix indicator_matrix(const Dataset& ds, bool include_class) {
  const auto& schema = ds.schema();
  std::vector<std::size_t> offsets;
  std::size_t j = 0;
  for (const auto& attr : schema.attributes()) {
    offsets.push_back(j);
    j += attr.vocabulary.size();
  }
  const auto class_offset = j;
  if (include_class) j += kNumLevels;

  linalg::Matrix z(ds.size(), j);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& row = ds.rows()[i];
    for (std::size_t a = 0; a < row.values.size(); ++a) z(i, offsets[a] + row.values[a]) = 1.0;
    if (include_class) z(i, class_offset + slot(row.level)) = 1.0;
  }
  return z;
}

struct McaResult {
  std::vector<Category> categories;  ///< active categories, zero-count ones removed
  std::vector<double> row_masses;
  std::vector<double> column_masses;
  std::vector<double> principal_inertias;  ///< all J - Q of them, non-increasing
  linalg::Matrix category_coordinates;     ///< J x dims, principal coordinates
  linalg::Matrix row_coordinates;          ///< n x dims, principal coordinates
  std::size_t q = 0;                       ///< active variables
  std::size_t j = 0;                       ///< active categories
  std::vector<std::string> warnings;

  std::size_t dims() const noexcept { return category_coordinates.cols(); }

  double total_inertia() const noexcept {
    double s = 0.0;
    for (double l : principal_inertias) s += l;
    return s;
  }
};

/// Indicator-matrix correspondence analysis.
///
/// With Z the n x J indicator matrix, P = Z / (nQ), row masses r and column
/// masses c, the standardized residuals
///
///   S = D_r^{-1/2} (P - r c^T) D_c^{-1/2}
///
/// are decomposed as S = U diag(sigma) V^T. Principal inertias are sigma^2
/// and both rows and categories are returned in principal coordinates,
/// F = D_r^{-1/2} U diag(sigma), G = D_c^{-1/2} V diag(sigma). Each
/// dimension is signed so the first non-negligible entry of its category
/// singular vector is positive.
///
/// Total inertia is J / Q - 1. No Benzecri or Greenacre adjustment is made.
inline McaResult mca_fit(const Dataset& ds, std::size_t dims = 2, bool include_class = true) {
  if (ds.empty()) throw ArgumentError("empty dataset");
  if (dims < 1) throw ArgumentError("MCA needs at least one dimension");

  const auto z_full = indicator_matrix(ds, include_class);
  const auto labels_full = indicator_labels(ds, include_class);

  McaResult res;
  std::vector<double> col_count(z_full.cols(), 0.0);
  for (std::size_t i = 0; i < z_full.rows(); ++i)
    for (std::size_t c = 0; c < z_full.cols(); ++c) col_count[c] += z_full(i, c);

  // Keep observed categories; each variable needs at least two of them.
  std::vector<std::size_t> keep;
  std::size_t start = 0;
  auto take_variable = [&](const std::string& var_name, std::size_t width) {
    std::size_t observed = 0;
    for (std::size_t c = start; c < start + width; ++c) {
      if (col_count[c] > 0.0) {
        keep.push_back(c);
        ++observed;
      } else {
        res.warnings.push_back("category '" + labels_full[c].attribute + "=" + labels_full[c].value +
                               "' never occurs and was dropped");
      }
    }
    if (observed < 2)
      throw ValueError("attribute '" + var_name + "' has a single observed category; MCA is undefined for it");
    start += width;
    ++res.q;
  };
  for (const auto& attr : ds.schema().attributes()) take_variable(attr.name, attr.vocabulary.size());
  if (include_class) take_variable(ds.schema().class_attribute(), kNumLevels);
  if (res.q == 0) throw ArgumentError("MCA needs at least one variable");

  const std::size_t n = ds.size();
  res.j = keep.size();
  if (dims > res.j - res.q)
    throw ArgumentError("requested " + std::to_string(dims) + " dimensions but only " +
                        std::to_string(res.j - res.q) + " are available");

  const double grand = static_cast<double>(n) * static_cast<double>(res.q);
  res.row_masses.assign(n, 1.0 / static_cast<double>(n));
  for (auto c : keep) {
    res.categories.push_back(labels_full[c]);
    res.column_masses.push_back(col_count[c] / grand);
  }

  linalg::Matrix s(n, res.j);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = res.row_masses[i];
    for (std::size_t k = 0; k < res.j; ++k) {
      const double c = res.column_masses[k];
      s(i, k) = (z_full(i, keep[k]) / grand - r * c) / std::sqrt(r * c);
    }
  }

  auto svd = linalg::svd_small(s);

  const std::size_t nontrivial = std::min(res.j - res.q, svd.sigma.size());
  for (std::size_t k = 0; k < nontrivial; ++k) res.principal_inertias.push_back(svd.sigma[k] * svd.sigma[k]);

  const std::size_t out_dims = std::min(dims, svd.sigma.size());
  for (std::size_t d = 0; d < out_dims; ++d) {
    std::size_t first = 0;
    while (first < svd.v.rows() && std::abs(svd.v(first, d)) <= 1e-12) ++first;
    if (first < svd.v.rows() && svd.v(first, d) < 0.0) {
      for (std::size_t k = 0; k < svd.v.rows(); ++k) svd.v(k, d) = -svd.v(k, d);
      for (std::size_t i = 0; i < svd.u.rows(); ++i) svd.u(i, d) = -svd.u(i, d);
    }
  }

  res.category_coordinates = linalg::Matrix(res.j, dims);
  res.row_coordinates = linalg::Matrix(n, dims);
  for (std::size_t d = 0; d < out_dims; ++d) {
    const double sigma = svd.sigma[d];
    for (std::size_t k = 0; k < res.j; ++k)
      res.category_coordinates(k, d) = svd.v(k, d) * sigma / std::sqrt(res.column_masses[k]);
    for (std::size_t i = 0; i < n; ++i)
      res.row_coordinates(i, d) = svd.u(i, d) * sigma / std::sqrt(res.row_masses[i]);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Coordinate file: kind,attribute,value,dim1..dimK

inline void export_coordinates(std::ostream& out, const McaResult& res) {
  out << "kind,attribute,value";
  for (std::size_t d = 0; d < res.dims(); ++d) out << ",dim" << (d + 1);
  out << '\n';
  for (std::size_t k = 0; k < res.categories.size(); ++k) {
    out << "category," << res.categories[k].attribute << ',' << res.categories[k].value;
    for (std::size_t d = 0; d < res.dims(); ++d) out << ',' << csv::format_double(res.category_coordinates(k, d));
    out << '\n';
  }
  for (std::size_t i = 0; i < res.row_coordinates.rows(); ++i) {
    out << "row,," << i;
    for (std::size_t d = 0; d < res.dims(); ++d) out << ',' << csv::format_double(res.row_coordinates(i, d));
    out << '\n';
  }
}

struct CoordinateLine {
  std::string kind;
  std::string attribute;
  std::string value;
  std::vector<double> coordinates;
};

inline std::vector<CoordinateLine> read_coordinates(std::istream& in) {
  const auto table = csv::read_table(in);
  if (table.header.size() < 4 || table.header[0] != "kind" || table.header[1] != "attribute" ||
      table.header[2] != "value")
    throw FormatError("coordinate file header must be kind,attribute,value,dim1..");
  std::vector<CoordinateLine> lines;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    CoordinateLine line{row[0], row[1], row[2], {}};
    for (std::size_t c = 3; c < row.size(); ++c) {
      const auto v = csv::parse_double(row[c]);
      if (!v) throw FormatError("line " + std::to_string(table.line_numbers[r]) + ": bad coordinate '" + row[c] + "'");
      line.coordinates.push_back(*v);
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace nbscreen::mca

#endif  // NBSCREEN_MCA_HPP
