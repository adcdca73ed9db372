#include "doctest.h"

#include <boost/math/distributions/chi_squared.hpp>

#include "expcopilot/baselines.hpp"
#include "expcopilot/error.hpp"
#include "support.hpp"

using namespace expcopilot;

namespace {

SolutionSpace line_space() { return SolutionSpace("line", "One knob.", {ParameterDef::numeric("x", 0, 100)}); }

Solution at(double x) { return Solution::make(line_space(), {{"x", x}}); }

Task task(const std::string& id, std::vector<double> meta = {}) {
  Task t{id, "line", "task " + id, std::nullopt};
  if (!meta.empty()) t.meta_features = std::move(meta);
  return t;
}

}  // namespace

TEST_CASE("random baseline is uniform over the table") {
  std::vector<TableRow> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({"t", at(i), 0.1 * i});
  const Benchmark b("ten", line_space(), Direction::higher_better, {task("t")}, rows);
  std::vector<double> counts(10, 0.0);
  const int draws = 10000;
  for (int seed = 0; seed < draws; ++seed) {
    const auto s = baseline_random(b, "t", 1, static_cast<std::uint64_t>(seed));
    REQUIRE(s.size() == 1);
    counts[static_cast<std::size_t>(s[0].numeric("x"))] += 1;
  }
  double stat = 0;
  for (double c : counts) stat += (c - draws / 10.0) * (c - draws / 10.0) / (draws / 10.0);
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(9), stat));
  CHECK(p > 0.01);

  const auto three = baseline_random(b, "t", 3, 5);
  CHECK(three.size() == 3);
  CHECK(three[0] != three[1]);
  CHECK(three[1] != three[2]);
  CHECK(three[0] != three[2]);
  CHECK(three == baseline_random(b, "t", 3, 5));
  CHECK(baseline_random(b, "t", 20, 5).size() == 10);
}

TEST_CASE("constant baseline is the greedy portfolio") {
  // Normalized: A 100 50 0 75, B 0 50 100 75, C 0 0 0 100.
  const std::vector<double> a{0.9, 0.5, 0.1, 0.7}, bb{0.2, 0.6, 1.0, 0.8}, c{0.3, 0.3, 0.3, 0.5};
  std::vector<TableRow> rows;
  for (int i = 0; i < 4; ++i) {
    rows.push_back({"A", at(i + 1), a[i]});
    rows.push_back({"B", at(i + 1), bb[i]});
    rows.push_back({"C", at(i + 1), c[i]});
  }
  const Benchmark b("greedy", line_space(), Direction::higher_better, {task("A"), task("B"), task("C")}, rows);
  const std::vector<std::string> train{"A", "B", "C"};
  const auto p = baseline_constant(b, train, 4);
  REQUIRE(p.size() == 4);
  CHECK(p[0].numeric("x") == 4);
  CHECK(p[1].numeric("x") == 1);  // ties with 3, smaller key
  CHECK(p[2].numeric("x") == 3);
  CHECK(p[3].numeric("x") == 2);
  CHECK(baseline_constant(b, train, 10).size() == 4);
  CHECK_THROWS(baseline_constant(b, std::vector<std::string>{}, 1));

  const auto m = normalized_matrix(b, train);
  CHECK(m == std::vector<double>{100, 50, 0, 75, 0, 50, 100, 75, 0, 0, 0, 100});
}

TEST_CASE("nearest-task baseline falls through to the next task") {
  std::vector<TableRow> rows{{"near", at(1), 0.5}, {"near", at(2), 0.9},
                             {"far", at(1), 0.1},  {"far", at(2), 0.2},
                             {"far", at(3), 0.9},  {"far", at(4), 0.4},
                             {"q", at(1), 0.3},    {"q", at(2), 0.6}};
  const Benchmark b("nn", line_space(), Direction::higher_better,
                    {task("q", {0, 0}), task("near", {1, 0}), task("far", {5, 5})}, rows);
  const std::vector<std::string> train{"near", "far"};
  const auto s = baseline_nearest_task(b, train, "q", 3);
  REQUIRE(s.size() == 3);
  CHECK(s[0].numeric("x") == 2);
  CHECK(s[1].numeric("x") == 1);
  CHECK(s[2].numeric("x") == 3);

  const Benchmark plain("nn", line_space(), Direction::higher_better, {task("q"), task("near")},
                        {{"near", at(1), 0.5}, {"near", at(2), 0.9}, {"q", at(1), 0.3}, {"q", at(2), 0.6}});
  CHECK_THROWS_AS(baseline_nearest_task(plain, std::vector<std::string>{"near"}, "q", 1), Error);
}

TEST_CASE("baselines on the synthetic bundle") {
  const auto& b = testsupport::synthetic();
  auto train = testsupport::task_ids(b);
  train.erase(train.begin());
  const auto c = baseline_constant(b, train, 3);
  CHECK(c.size() == 3);
  const auto n = baseline_nearest_task(b, train, "synth_00", 3);
  CHECK(n.size() == 3);
}
