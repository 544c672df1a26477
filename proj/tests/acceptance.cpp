// One line per criterion; exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "nbscreen/hdrs.hpp"
#include "nbscreen/mca.hpp"
#include "nbscreen/metrics.hpp"
#include "nbscreen/naive_bayes.hpp"
#include "nbscreen/svd.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"
#include "random_model.hpp"

using namespace nbscreen;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) detail << what;
    ok = ok && cond;
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(10);
    s << what << ": got " << got << ", want " << want << " +- " << tol;
    expect(std::abs(got - want) <= tol, s.str());
  }
};

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

nlohmann::json table2_json(Check& c, double* ms = nullptr) {
  const auto start = Clock::now();
  const auto r = test::run_cli({"metrics", "--confusion", test::data_path("table2_confusion.csv"), "--format", "json"});
  if (ms) *ms = elapsed_ms(start);
  c.expect(r.code == 0, "metrics exited " + std::to_string(r.code) + ": " + r.err);
  return r.code == 0 ? nlohmann::json::parse(r.out) : nlohmann::json::object();
}

void ac1(Check& c) {
  double ms = 0;
  const auto j = table2_json(c, &ms);
  if (!c.ok) return;
  c.near(j["accuracy"].get<double>(), 0.7803, 1e-4, "accuracy");
  c.near(j["accuracy"].get<double>(), 245.0 / 314.0, 1e-15, "accuracy 245/314");
  c.expect(ms < 100.0, "runtime " + std::to_string(ms) + " ms");
}

void ac2(Check& c) {
  const auto j = table2_json(c);
  if (!c.ok) return;
  c.near(j["kappa"].get<double>(), 0.6642, 5e-4, "kappa");
  c.near(j["kappa"].get<double>(), 0.66425, 5e-6, "kappa exact");
}

/// Bisection on the brute-force tail sum, independent of the library.
double brute_bound(std::uint64_t k, std::uint64_t n, double tail, bool lower) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = (lo + hi) / 2;
    // Lower: P(X >= k | p) grows with p. Upper: P(X <= k | p) shrinks with p.
    const double v = lower ? static_cast<double>(oracle::brute_upper_tail(mid, n, k))
                           : 1.0 - static_cast<double>(oracle::brute_upper_tail(mid, n, k + 1));
    if ((v < tail) == lower)
      lo = mid;
    else
      hi = mid;
  }
  return (lo + hi) / 2;
}

void ac3(Check& c) {
  const auto j = table2_json(c);
  if (!c.ok) return;
  const double lower = j["accuracy_ci"]["lower"].get<double>(), upper = j["accuracy_ci"]["upper"].get<double>();
  c.near(lower, 0.7303, 2e-3, "lower");
  c.near(upper, 0.8248, 2e-3, "upper");
  c.near(lower, brute_bound(245, 314, 0.025, true), 1e-6, "lower vs tail-sum oracle");
  c.near(upper, brute_bound(245, 314, 0.025, false), 1e-6, "upper vs tail-sum oracle");
}

void ac4(Check& c) {
  const auto t3 = test::table3();
  c.expect(t3.stats.size() == 5 && t3.stats[0].n() == 340, "fixture must have 5 classes and n = 340");
  if (!c.ok) return;
  const std::array<std::uint64_t, 5> actual{11, 23, 35, 174, 97}, tp{7, 11, 20, 126, 65}, predicted{12, 21, 45, 170, 92};
  for (std::size_t k = 0; k < 5; ++k) {
    c.expect(t3.stats[k].tp == tp[k], "tp " + t3.labels[k]);
    c.expect(t3.stats[k].tp + t3.stats[k].fn == actual[k], "actual " + t3.labels[k]);
    c.expect(t3.stats[k].tp + t3.stats[k].fp == predicted[k], "predicted " + t3.labels[k]);
  }
  const auto m = metrics::per_class_metrics(t3.stats);
  const auto published = test::table3_published();
  std::size_t compared = 0;
  for (const auto& [name, values] : published)
    for (std::size_t k = 0; k < 5; ++k) {
      const auto got = test::metric_by_name(m[k], name);
      c.expect(got.has_value(), name + " " + t3.labels[k] + " undefined");
      if (got) c.near(*got, values[k], 5e-5, name + " " + t3.labels[k]);
      ++compared;
    }
  c.expect(compared == 40, "expected 40 published values, found " + std::to_string(compared));
}

void ac5(Check& c) {
  const auto model = fit_from_counts(test::table1(), 0.0);
  const std::array<std::uint64_t, 5> priors{17, 32, 68, 261, 141};
  for (std::size_t k = 0; k < 5; ++k) {
    const auto r = model.prior_exact(k);
    c.expect(r.numerator * 519 == priors[k] * r.denominator, "prior " + model.class_labels()[k]);
  }
  const auto severe = slot(Level::Severe);
  auto check = [&](const std::string& attr, const std::string& value, std::uint64_t num) {
    const auto a = model.find_attribute(attr);
    c.expect(a.has_value(), "attribute " + attr);
    if (!a) return;
    const auto v = model.attributes()[*a].find(value);
    c.expect(v.has_value(), "value " + value);
    if (!v) return;
    const auto r = model.conditional_exact(*a, *v, severe);
    c.expect(r.numerator * 261 == num * r.denominator, "P(" + attr + "=" + value + "|Severe)");
  };
  check("Sex", "Male", 137);
  check("AffectedByCovid", "Yes", 181);
}

void ac6(Check& c) {
  const auto table = test::table1();
  const auto expected = fit_from_counts(table, 0.0);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 10; ++i) {
    const auto seed = rng();
    const auto got = fit(synthesize(table, seed), 0.0);
    c.expect(got == expected, "seed " + std::to_string(seed));
    c.expect(got.value_counts() == expected.value_counts() && got.class_counts() == expected.class_counts(),
             "counts for seed " + std::to_string(seed));
  }
}

void ac7(Check& c) {
  const auto table = test::table1();
  const auto ds = synthesize(table, 42);
  const auto parts = stratified_split(ds, 0.7, 42);
  c.expect(parts.train.size() == 364, "train size " + std::to_string(parts.train.size()));
  c.expect(parts.train.class_counts() == ClassCounts{12, 22, 48, 183, 99}, "per-class train counts");
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100 && c.ok; ++i) {
    const auto seed = rng();
    const auto idx = stratified_split_indices(ds, 0.7, seed);
    std::vector<std::size_t> all = idx.train;
    all.insert(all.end(), idx.validation.begin(), idx.validation.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect_all(ds.size());
    std::iota(expect_all.begin(), expect_all.end(), 0);
    c.expect(all == expect_all, "partition for seed " + std::to_string(seed));
    c.expect(ds.subset(idx.train).class_counts() == ClassCounts{12, 22, 48, 183, 99},
             "stratum sizes for seed " + std::to_string(seed));
  }
}

void ac8(Check& c) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200 && c.ok; ++trial) {
    const auto [m, e] = test::random_model(rng);
    const auto post = log_posterior(m, e);
    const auto exact = oracle::rational_posterior(m, e);
    double sum = 0.0;
    for (std::size_t k = 0; k < m.class_count(); ++k) {
      c.near(post.probabilities[k], static_cast<double>(exact[k]), 1e-9, "trial " + std::to_string(trial));
      sum += post.probabilities[k];
    }
    c.near(sum, 1.0, 1e-12, "sum, trial " + std::to_string(trial));
    if (post.degenerate) continue;
    const auto best = argmax_class(m, post.log_scores);
    for (double shift : {-500.0, -1.25, 3.0, 800.0}) {
      auto shifted = post.log_scores;
      for (auto& s : shifted) s += shift;
      c.expect(argmax_class(m, shifted) == best, "argmax moved under shift, trial " + std::to_string(trial));
    }
  }
}

void ac9(Check& c) {
  const auto inst = hdrs::default_instrument();
  c.expect(inst.max_total() == 52, "max total " + std::to_string(inst.max_total()));
  const std::vector<std::pair<int, Level>> edges{{7, Level::Normal},    {8, Level::Mild},      {12, Level::Mild},
                                                 {13, Level::Moderate}, {17, Level::Moderate}, {18, Level::Severe},
                                                 {29, Level::Severe},   {30, Level::VerySevere}};
  for (auto [score, level] : edges)
    c.expect(hdrs::band(score, inst) == level, "score " + std::to_string(score));
}

std::vector<double> eigen_oracle(const Dataset& ds) {
  const auto z = mca::indicator_matrix(ds, false);
  Eigen::MatrixXd e(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < z.cols(); ++j) e(i, j) = z(i, j);
  return oracle::mca_inertias(e);
}

Dataset two_binaries(const std::vector<std::pair<std::size_t, std::size_t>>& rows) {
  std::vector<Row> out;
  for (auto [a, b] : rows) out.push_back({{a, b}, Level::Normal});
  return Dataset(Schema(std::vector<Attribute>{{"A", {"no", "yes"}}, {"B", {"no", "yes"}}}), out);
}

void ac10(Check& c) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ds = test::random_dataset(rng, 2 + trial % 4, 4, 20 + trial);
    const auto res = mca::mca_fit(ds, 1, true);
    c.near(res.total_inertia(), static_cast<double>(res.j) / static_cast<double>(res.q) - 1.0, 1e-9,
           "inertia identity, trial " + std::to_string(trial));
  }

  std::vector<std::pair<std::size_t, std::size_t>> uniform;
  for (int rep = 0; rep < 3; ++rep)
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) uniform.push_back({a, b});
  const auto ind = two_binaries(uniform);
  const auto ind_res = mca::mca_fit(ind, 2, false);
  const auto ind_oracle = eigen_oracle(ind);
  for (std::size_t k = 0; k < 2; ++k) {
    c.near(ind_res.principal_inertias[k], 0.5, 1e-9, "independent inertia");
    c.near(ind_oracle[k], 0.5, 1e-9, "independent oracle");
  }

  const auto perfect = two_binaries({{0, 0}, {1, 1}, {1, 1}, {0, 0}, {1, 1}});
  c.near(mca::mca_fit(perfect, 1, false).principal_inertias[0], 1.0, 1e-9, "perfect association");
  c.near(eigen_oracle(perfect)[0], 1.0, 1e-9, "perfect association oracle");

  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    linalg::Matrix m(8, 6);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 6; ++j) m(i, j) = gauss(rng);
    const auto r = linalg::reconstruct(linalg::svd_small(m));
    double worst = 0.0;
    for (std::size_t i = 0; i < m.data().size(); ++i) worst = std::max(worst, std::abs(r.data()[i] - m.data()[i]));
    c.expect(worst < 1e-8, "svd residual " + std::to_string(worst));
  }
}

void ac11(Check& c) {
  const auto start = Clock::now();
  std::string first, second;
  {
    test::ScratchDir dir("ac11a");
    first = test::run_pipeline(dir, 42);
  }
  {
    test::ScratchDir dir("ac11b");
    second = test::run_pipeline(dir, 42);
  }
  const double ms = elapsed_ms(start);
  c.expect(first.rfind("FAILED", 0) == std::string::npos, first);
  c.expect(first == second, "reports differ between runs");
  c.expect(ms < 5000.0, "runtime " + std::to_string(ms) + " ms");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"AC1  confusion fixture accuracy via metrics command, < 100 ms", ac1},
      {"AC2  confusion fixture kappa", ac2},
      {"AC3  Clopper-Pearson interval on 245/314", ac3},
      {"AC4  40 per-class values from one-vs-rest margins", ac4},
      {"AC5  exact priors and conditionals from contingency counts", ac5},
      {"AC6  synthesize then fit reproduces counts, 10 seeds", ac6},
      {"AC7  stratified split: 364 training rows, 100 seeds", ac7},
      {"AC8  posterior vs rational oracle, 200 models", ac8},
      {"AC9  HDRS band edges and max total", ac9},
      {"AC10 MCA inertia properties and SVD residual", ac10},
      {"AC11 pipeline with seed 42 is deterministic, < 5 s", ac11},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << "exception: " << e.what();
    }
    std::cout << (c.ok ? "[PASS] " : "[FAIL] ") << name;
    if (!c.ok) std::cout << " -- " << c.detail.str();
    std::cout << '\n';
    failures += c.ok ? 0 : 1;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed\n";
  return failures;
}
