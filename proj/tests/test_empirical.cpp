#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "spin/distributions.hpp"
#include "spin/empirical.hpp"
#include "spin/rng.hpp"
#include "spin/samples.hpp"

using spin::IntervalEstimate;
using spin::SortedSample;

TEST_CASE("window count rounds the target content up, with a guard for exact products") {
  CHECK(spin::shortest_window_count(5, 0.2) == 4);    // 0.8 * 5 lands exactly on 4
  CHECK(spin::shortest_window_count(100, 0.05) == 95);
  CHECK(spin::shortest_window_count(500, 0.05) == 475);
  CHECK(spin::shortest_window_count(10, 0.05) == 10);  // ceil(9.5)
  CHECK(spin::shortest_window_count(3, 0.5) == 2);     // ceil(1.5)
}

TEST_CASE("the shortest window on a small skewed sample hugs the dense side") {
  SortedSample s = spin::sort_sample({0.0, 1.0, 2.0, 3.0, 10.0});
  auto [ivl, win] = spin::empirical_shortest(s, 0.2);
  CHECK(ivl.lower == 0.0);
  CHECK(ivl.upper == 3.0);
  CHECK(win.lower_index == 1);
  CHECK(win.upper_index == 4);
  CHECK(win.window_count == 4);
  CHECK_FALSE(ivl.degenerate);
}

TEST_CASE("window ties resolve to the smallest lower index") {
  // both [1..3] and [2..4] span length 2; the earlier window wins
  SortedSample s = spin::sort_sample({0.0, 1.0, 2.0, 3.0});
  auto [ivl, win] = spin::empirical_shortest(s, 0.3);  // count = ceil(2.8) = 3
  CHECK(win.window_count == 3);
  CHECK(win.lower_index == 1);
  CHECK(ivl.lower == 0.0);
  CHECK(ivl.upper == 2.0);
}

TEST_CASE("a mirror-symmetric sample yields a mirror-symmetric shortest window") {
  SortedSample s = spin::sort_sample({-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0});
  auto [ivl, win] = spin::empirical_shortest(s, 0.25);  // count = 6 of 8
  CHECK(ivl.lower == -2.0);
  CHECK(ivl.upper == 2.0);
  CHECK(win.lower_index == 2);
  CHECK(win.upper_index == 7);
}

TEST_CASE("shortest windows on large normal samples approach the true interval") {
  auto nd = spin::make_distribution("normal");
  SortedSample s = spin::sample_iid(*nd, 10000, 1234);
  auto [ivl, win] = spin::empirical_shortest(s, 0.05);
  CHECK(ivl.lower == doctest::Approx(-1.96).epsilon(0.15 / 1.96));
  CHECK(ivl.upper == doctest::Approx(1.96).epsilon(0.15 / 1.96));
  CHECK(win.window_count == spin::shortest_window_count(10000, 0.05));
}

TEST_CASE("the shortest window beats every window of the same count") {
  spin::RngStream rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 20 + static_cast<int>(rng.uniform_below(80));
    std::vector<double> raw(static_cast<std::size_t>(n));
    for (double& v : raw) v = rng.gamma(2.0);
    SortedSample s = spin::sort_sample(raw);
    const double alpha = 0.1 + 0.4 * rng.uniform01();
    auto [ivl, win] = spin::empirical_shortest(s, alpha);
    const int count = win.window_count;
    for (int j = 1; j + count - 1 <= n; ++j) {
      CHECK(ivl.upper - ivl.lower <= s.at(j + count - 1) - s.at(j) + 1e-12);
    }
    // in particular it is no longer than the count-matched central window
    const int jc = (n - count) / 2 + 1;
    CHECK(ivl.upper - ivl.lower <= s.at(jc + count - 1) - s.at(jc) + 1e-12);
  }
}

TEST_CASE("interpolated quantiles follow the rank rule with edge clipping") {
  SortedSample s = spin::sort_sample({10.0, 20.0, 30.0, 40.0});
  CHECK(spin::empirical_quantile(s, 0.5) == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(spin::empirical_quantile(s, 0.4) == doctest::Approx(20.0).epsilon(1e-12));  // rank 2.0
  CHECK(spin::empirical_quantile(s, 0.3) == doctest::Approx(15.0).epsilon(1e-12));  // rank 1.5
  CHECK(spin::empirical_quantile(s, 0.01) == 10.0);  // rank 0.05 clips to 1
  CHECK(spin::empirical_quantile(s, 0.99) == 40.0);  // rank 4.95 clips to 4
}

TEST_CASE("central intervals interpolate the tail quantiles") {
  std::vector<double> raw(100);
  for (int i = 0; i < 100; ++i) raw[static_cast<std::size_t>(i)] = i + 1.0;
  SortedSample s = spin::sort_sample(raw);
  IntervalEstimate ivl = spin::empirical_central(s, 0.10);
  // ranks 0.05*101 = 5.05 and 0.95*101 = 95.95
  CHECK(ivl.lower == doctest::Approx(5.05).epsilon(1e-12));
  CHECK(ivl.upper == doctest::Approx(95.95).epsilon(1e-12));
}

TEST_CASE("central intervals on large normal samples approach the quantile pair") {
  auto nd = spin::make_distribution("normal");
  SortedSample s = spin::sample_iid(*nd, 10000, 77);
  IntervalEstimate ivl = spin::empirical_central(s, 0.05);
  CHECK(ivl.lower == doctest::Approx(-1.96).epsilon(0.15 / 1.96));
  CHECK(ivl.upper == doctest::Approx(1.96).epsilon(0.15 / 1.96));
}

TEST_CASE("interval estimators are translation and scale equivariant") {
  spin::RngStream rng(66);
  std::vector<double> raw(60);
  for (double& v : raw) v = rng.normal();
  SortedSample s = spin::sort_sample(raw);
  std::vector<double> scaled = raw;
  for (double& v : scaled) v = 2.5 * v - 3.0;
  SortedSample t = spin::sort_sample(scaled);

  auto map = [](double x) { return 2.5 * x - 3.0; };
  const double alpha = 0.1;

  auto [i1, w1] = spin::empirical_shortest(s, alpha);
  auto [i2, w2] = spin::empirical_shortest(t, alpha);
  CHECK(i2.lower == doctest::Approx(map(i1.lower)).epsilon(1e-12));
  CHECK(i2.upper == doctest::Approx(map(i1.upper)).epsilon(1e-12));
  CHECK(w1.lower_index == w2.lower_index);

  IntervalEstimate c1 = spin::empirical_central(s, alpha);
  IntervalEstimate c2 = spin::empirical_central(t, alpha);
  CHECK(c2.lower == doctest::Approx(map(c1.lower)).epsilon(1e-12));
  CHECK(c2.upper == doctest::Approx(map(c1.upper)).epsilon(1e-12));

  IntervalEstimate g1 = spin::gaussian_fit_interval(s, alpha);
  IntervalEstimate g2 = spin::gaussian_fit_interval(t, alpha);
  CHECK(g2.lower == doctest::Approx(map(g1.lower)).epsilon(1e-12));
  CHECK(g2.upper == doctest::Approx(map(g1.upper)).epsilon(1e-12));
}

TEST_CASE("the gaussian fit uses mean plus or minus a normal quantile of the sd") {
  spin::RngStream rng(9);
  std::vector<double> raw(200);
  for (double& v : raw) v = 1.5 + 0.7 * rng.normal();
  SortedSample s = spin::sort_sample(raw);
  const double mean = testutil::mean_of(raw);
  const double sd = testutil::sd_of(raw);
  const double z = spin::normal_quantile(0.975);
  IntervalEstimate ivl = spin::gaussian_fit_interval(s, 0.05);
  CHECK(ivl.lower == doctest::Approx(mean - z * sd).epsilon(1e-12));
  CHECK(ivl.upper == doctest::Approx(mean + z * sd).epsilon(1e-12));
}

TEST_CASE("constant samples give degenerate point intervals") {
  SortedSample s = spin::sort_sample(std::vector<double>(20, 7.0));
  IntervalEstimate g = spin::gaussian_fit_interval(s, 0.05);
  CHECK(g.degenerate);
  CHECK(g.lower == 7.0);
  CHECK(g.upper == 7.0);

  auto [ivl, win] = spin::empirical_shortest(s, 0.05);
  CHECK(ivl.lower == 7.0);
  CHECK(ivl.upper == 7.0);
}

TEST_CASE("interval estimators reject alpha outside the open unit interval") {
  SortedSample s = spin::sort_sample({1.0, 2.0, 3.0, 4.0, 5.0});
  for (double bad : {0.0, 1.0, -0.1, 1.5}) {
    CHECK_THROWS(spin::empirical_shortest(s, bad));
    CHECK_THROWS(spin::empirical_central(s, bad));
    CHECK_THROWS(spin::gaussian_fit_interval(s, bad));
    CHECK_THROWS(spin::shortest_window_count(5, bad));
  }
}
