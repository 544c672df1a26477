#pragma once

// Independent reference computations used only by the tests.

#include <boost/math/distributions/beta.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/Dense>

#include <vector>

#include "nbscreen/naive_bayes.hpp"

namespace nbscreen::oracle {

using Rational = boost::multiprecision::cpp_rational;

/// Exact linear-space posterior: prior times the product of smoothed
/// conditionals, normalized by their sum. Falls back to the priors when the
/// sum is zero.
inline std::vector<Rational> rational_posterior(const NBModel& m, const EncodedEvidence& e) {
  const Rational alpha(m.alpha());  // exact conversion of the binary double
  const auto k = m.class_count();
  std::vector<Rational> w(k);
  for (std::size_t c = 0; c < k; ++c) {
    w[c] = Rational(m.class_counts()[c]) / Rational(m.total());
    for (std::size_t a = 0; a < e.size(); ++a) {
      if (!e[a]) continue;
      const Rational n_c(m.class_counts()[c]);
      const Rational vocab(m.attributes()[a].vocabulary.size());
      if (*e[a] >= m.attributes()[a].vocabulary.size()) {
        if (alpha == 0) continue;
        w[c] *= alpha / (n_c + alpha * (vocab + 1));
        continue;
      }
      const Rational den = n_c + alpha * vocab;
      w[c] *= den == 0 ? Rational(0) : (Rational(m.value_count(a, *e[a], c)) + alpha) / den;
    }
  }
  Rational sum = 0;
  for (const auto& x : w) sum += x;
  if (sum == 0) {
    for (std::size_t c = 0; c < k; ++c) w[c] = Rational(m.class_counts()[c]) / Rational(m.total());
    return w;
  }
  for (auto& x : w) x /= sum;
  return w;
}

/// Clopper-Pearson endpoints via the beta-quantile identity, a different
/// route from the binomial-tail bisection under test.
inline std::pair<double, double> clopper_pearson_beta(std::uint64_t k, std::uint64_t n, double level) {
  const double a = (1.0 - level) / 2.0;
  const double lower =
      k == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<double>(double(k), double(n - k + 1)), a);
  const double upper =
      k == n ? 1.0 : boost::math::quantile(boost::math::beta_distribution<double>(double(k + 1), double(n - k)), 1 - a);
  return {lower, upper};
}

/// Direct summation of the binomial pmf with exact rational coefficients
/// evaluated in long double: P(X >= k).
inline long double brute_upper_tail(long double p, std::uint64_t n, std::uint64_t k) {
  long double sum = 0.0L;
  long double coeff = 1.0L;  // C(n, i), built incrementally
  for (std::uint64_t i = 0; i <= n; ++i) {
    if (i > 0) coeff = coeff * static_cast<long double>(n - i + 1) / static_cast<long double>(i);
    if (i >= k) sum += coeff * std::pow(p, static_cast<long double>(i)) * std::pow(1 - p, static_cast<long double>(n - i));
  }
  return sum;
}

/// Eigenvalues of a symmetric matrix, descending.
inline std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(out.rbegin(), out.rend());
  return out;
}

/// Principal inertias of indicator-matrix CA built from scratch: eigenvalues
/// of S^T S where S is the standardized residual of Z / sum(Z). Categories
/// with zero count must not be present in `z`.
inline std::vector<double> mca_inertias(const Eigen::MatrixXd& z) {
  const double total = z.sum();
  const Eigen::MatrixXd p = z / total;
  const Eigen::VectorXd r = p.rowwise().sum();
  const Eigen::VectorXd c = p.colwise().sum();
  const Eigen::MatrixXd resid = p - r * c.transpose();
  const Eigen::MatrixXd s = r.cwiseSqrt().cwiseInverse().asDiagonal() * resid * c.cwiseSqrt().cwiseInverse().asDiagonal();
  return symmetric_eigenvalues(s.transpose() * s);
}

}  // namespace nbscreen::oracle
