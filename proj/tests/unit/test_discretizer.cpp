#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "expcopilot/discretizer.hpp"
#include "expcopilot/error.hpp"

using namespace expcopilot;

namespace {

// Walks the piecewise-linear empirical CDF inverse point by point.
double brute_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v[0];
  const double step = 1.0 / static_cast<double>(v.size() - 1);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double a = static_cast<double>(i) * step;
    const double b = static_cast<double>(i + 1) * step;
    if (q >= a - 1e-15 && q <= b + 1e-15) {
      const double w = std::clamp((q - a) / (b - a), 0.0, 1.0);
      return w == 0.0 ? v[i] : v[i] + w * (v[i + 1] - v[i]);
    }
  }
  return v.back();
}

std::vector<double> oracle_splits(const std::vector<double>& values, std::size_t n_levels) {
  std::vector<double> out;
  for (std::size_t i = 1; i < n_levels; ++i) {
    const double s = brute_quantile(values, static_cast<double>(i) / static_cast<double>(n_levels));
    if (out.empty() || out.back() != s) out.push_back(s);
  }
  if (!out.empty() && out.front() == *std::min_element(values.begin(), values.end())) out.erase(out.begin());
  return out;
}

const ParameterDef kLinear = ParameterDef::numeric("x", 0, 100);
const ParameterDef kLog = ParameterDef::numeric("c", 1e-6, 1e3, true);

}  // namespace

TEST_CASE("split points of 1..10") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto d = Discretizer::fit(v, kLinear);
  REQUIRE(d.split_points().size() == 4);
  const double expected[] = {2.8, 4.6, 6.4, 8.2};
  for (std::size_t i = 0; i < 4; ++i) CHECK(d.split_points()[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  CHECK(d.discretize(3.5) == "low");
  CHECK(d.discretize(-50) == "very low");
  CHECK(d.discretize(1e9) == "very high");
  CHECK(d.discretize(2.8) == "low");  // half-open: split belongs to the upper bin
  CHECK(d.representative("very low") == 1.5);
  CHECK(d.representative("low") == 3.5);
  CHECK(d.representative("very high") == 9.5);
}

TEST_CASE("identical values collapse to medium") {
  const std::vector<double> v(7, 4.2);
  const auto d = Discretizer::fit(v, kLinear);
  CHECK(d.split_points().empty());
  CHECK(d.bin_labels() == std::vector<std::string>{"medium"});
  CHECK(d.discretize(-1) == "medium");
  CHECK(d.discretize(99) == "medium");
  CHECK(d.representative("medium") == 4.2);
  // Labels of collapsed bins resolve to the surviving one.
  CHECK(d.representative("very high") == 4.2);
}

TEST_CASE("log-scale splits are quantiles of the exponents") {
  const std::vector<double> v{1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  const auto d = Discretizer::fit(v, kLog);
  CHECK(d.fitted_in_log());
  const auto exps = oracle_splits({-5, -4, -3, -2, -1}, 5);
  REQUIRE(d.split_points().size() == exps.size());
  for (std::size_t i = 0; i < exps.size(); ++i)
    CHECK(std::log10(d.split_points()[i]) == doctest::Approx(exps[i]).epsilon(1e-12));
}

TEST_CASE("empty bins take the interval midpoint") {
  const std::vector<double> v{1, 10};
  const auto d = Discretizer::fit(v, kLinear);
  REQUIRE(d.split_points().size() == 4);
  CHECK(d.representative("very low") == 1.0);
  CHECK(d.representative("high") == doctest::Approx(7.3).epsilon(1e-12));
  CHECK(d.representative("very high") == 10.0);
}

TEST_CASE("collapsed bins are relabeled symmetrically") {
  // Two distinct values: one split, two bins.
  const std::vector<double> v{1, 1, 1, 1, 5, 5, 5, 5};
  const auto d = Discretizer::fit(v, kLinear);
  CHECK(d.bin_labels() == std::vector<std::string>{"low", "high"});
  CHECK(d.discretize(1) == "low");
  CHECK(d.discretize(5) == "high");
  CHECK(d.representative("very low") == 1.0);
  CHECK(d.representative("medium") == 1.0);  // equidistant, lower wins
  CHECK(d.representative("very high") == 5.0);
  CHECK_THROWS(d.representative("huge"));
}

TEST_CASE("fit errors") {
  CHECK_THROWS_WITH(Discretizer::fit(std::vector<double>{}, kLinear), doctest::Contains("no best-solution statistics"));
  CHECK_THROWS_WITH_AS(Discretizer::fit(std::vector<double>{1, 200}, kLinear), doctest::Contains("'x'"),
                       OutOfSpaceError);
  CHECK_THROWS(Discretizer::fit(std::vector<double>{1, 2}, kLinear, 1));
  CHECK_THROWS(Discretizer::fit(std::vector<double>{1, 2}, kLinear, 6));
  CHECK_THROWS(Discretizer::fit(std::vector<double>{1, 2}, ParameterDef::categorical("k", {"a"})));
}

TEST_CASE("from_parts validates") {
  CHECK_NOTHROW(Discretizer::from_parts("x", {2}, {"low", "high"}, {1, 3}, false, 0, 10));
  CHECK_THROWS(Discretizer::from_parts("x", {2, 2}, {"low", "medium", "high"}, {1, 2, 3}, false, 0, 10));
  CHECK_THROWS(Discretizer::from_parts("x", {2}, {"low", "medium"}, {1, 3}, false, 0, 10));
  CHECK_THROWS(Discretizer::from_parts("x", {2}, {"low", "high"}, {1, 30}, false, 0, 10));
}

TEST_CASE("random value sets match the brute-force quantile oracle") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + gen() % 40;
    const std::size_t levels = 2 + gen() % 4;
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) {
      // Small integer pool to force duplicates now and then.
      v.push_back(trial % 3 == 0 ? static_cast<double>(gen() % 6) : std::uniform_real_distribution<double>(0, 100)(gen));
    }
    const auto d = Discretizer::fit(v, kLinear, levels);
    const auto expected = oracle_splits(v, levels);
    REQUIRE(d.split_points().size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(d.split_points()[i] - expected[i]) <= 1e-9);
    for (std::size_t b = 0; b < d.bin_labels().size(); ++b)
      CHECK(d.discretize(d.representatives()[b]) == d.bin_labels()[b]);
  }
}
