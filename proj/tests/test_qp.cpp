#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "spin/distributions.hpp"
#include "spin/moments.hpp"
#include "spin/qp.hpp"
#include "spin/rng.hpp"
#include "spin/samples.hpp"
#include "spin/spin.hpp"

using spin::QpFailure;
using spin::QpProblem;
using spin::QpSolution;
using spin::SortedSample;

namespace {

QpProblem bare_problem(int m) {
  QpProblem p;
  p.D = Eigen::MatrixXd::Zero(m, m);
  p.d = Eigen::VectorXd::Zero(m);
  p.A_eq = Eigen::MatrixXd(0, m);
  p.b_eq = Eigen::VectorXd(0);
  p.A_ineq = Eigen::MatrixXd(0, m);
  p.b_ineq = Eigen::VectorXd(0);
  p.window_lo = 1;
  p.window_hi = m;
  p.center_index = 1;
  p.target_quantile = 0.0;
  p.ridge = 0.0;
  return p;
}

SortedSample grid_sample(int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i)
    v[static_cast<std::size_t>(i - 1)] = static_cast<double>(i) / (n + 1);
  return SortedSample::from_sorted(std::move(v));
}

}  // namespace

TEST_CASE("an unconstrained strictly convex problem solves in closed form") {
  QpProblem p = bare_problem(2);
  p.D = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  p.d << 2.0, 4.0;
  QpSolution sol = spin::solve(p);
  CHECK(sol.weights[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.weights[1] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(sol.objective == doctest::Approx(-5.0).epsilon(1e-10));
  CHECK(sol.active_set.empty());
  CHECK(sol.kkt_residual < 1e-7);
}

TEST_CASE("a lone normalization row spreads identical coordinates uniformly") {
  QpProblem p = bare_problem(5);
  p.D = 2.0 * Eigen::MatrixXd::Identity(5, 5);
  p.A_eq = Eigen::MatrixXd::Ones(1, 5);
  p.b_eq = Eigen::VectorXd::Ones(1);
  QpSolution sol = spin::solve(p);
  for (int i = 0; i < 5; ++i) CHECK(sol.weights[i] == doctest::Approx(0.2).epsilon(1e-10));
}

TEST_CASE("the objective helper evaluates the quadratic form") {
  QpProblem p = bare_problem(3);
  p.D << 2, 1, 0, 1, 3, 1, 0, 1, 2;
  p.d << 1, -1, 2;
  Eigen::VectorXd w(3);
  w << 0.5, -1.0, 2.0;
  const double expected = 0.5 * w.dot(p.D * w) - p.d.dot(w);
  CHECK(spin::qp_objective(p, w) == expected);
}

TEST_CASE("inconsistent constraints raise solver failures") {
  QpProblem p = bare_problem(3);
  p.D = 2.0 * Eigen::MatrixXd::Identity(3, 3);
  p.A_eq = Eigen::MatrixXd::Ones(2, 3);
  p.b_eq = Eigen::VectorXd(2);
  p.b_eq << 1.0, 2.0;  // sum cannot be 1 and 2 at once
  CHECK_THROWS_AS(spin::solve(p), QpFailure);

  QpProblem q = bare_problem(2);
  q.D = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  q.A_eq = Eigen::MatrixXd::Ones(1, 2);
  q.b_eq = Eigen::VectorXd::Ones(1);
  q.A_ineq = Eigen::MatrixXd(2, 2);
  q.A_ineq << 1.0, 0.0, -1.0, 0.0;
  q.b_ineq = Eigen::VectorXd(2);
  q.b_ineq << 0.9, 0.0;  // w0 >= 0.9 and w0 <= 0 simultaneously
  CHECK_THROWS_AS(spin::solve(q), QpFailure);

  QpProblem r = bare_problem(2);
  r.D = Eigen::MatrixXd::Identity(3, 3);  // mismatched dimensions
  CHECK_THROWS_AS(spin::solve(r), QpFailure);
}

TEST_CASE("the matrix assembly fills second moments plus a recorded ridge") {
  const int n = 99;
  SortedSample s = grid_sample(n);
  spin::UniformDist ud;
  spin::AnalyticDensity model(ud);
  spin::MomentEstimates mom = spin::order_stat_moments(s, 40, 60, model);
  QpProblem p = spin::build_problem(mom, 50, 20, 0.5, s);

  CHECK(p.ridge > 0.0);
  CHECK(p.window_lo == 40);
  CHECK(p.window_hi == 60);

  // diagonal: 2 * (Var X_(i) + (E X_(i))^2), with the ridge added on top
  const int k50 = 50 - p.window_lo;
  const double var50 = 0.25 / 101.0;
  CHECK(p.D(k50, k50) - p.ridge == doctest::Approx(2.0 * (var50 + 0.25)).epsilon(1e-12));

  // off-diagonal: 2 * (cov + E E), no ridge
  const int k45 = 45 - p.window_lo, k55 = 55 - p.window_lo;
  const double cov = 0.45 * 0.45 / 101.0;
  CHECK(p.D(k45, k55) == doctest::Approx(2.0 * (cov + 0.45 * 0.55)).epsilon(1e-12));
  CHECK(p.D(k45, k55) == p.D(k55, k45));

  // linear term: 2 * target * E X_(i)
  CHECK(p.d[k50] == doctest::Approx(2.0 * 0.5 * 0.5).epsilon(1e-12));
  CHECK(p.d[k45] == doctest::Approx(2.0 * 0.5 * 0.45).epsilon(1e-12));

  // plain quantiles replace the corrected means when the correction is off
  QpProblem plain = spin::build_problem(mom, 50, 20, 0.5, s, false);
  CHECK(plain.d[k50] == doctest::Approx(2.0 * 0.5 * s.at(50)).epsilon(1e-12));
}

TEST_CASE("a three-point window leaves one degree of freedom and solves symmetrically") {
  SortedSample s = grid_sample(9);
  spin::UniformDist ud;
  spin::AnalyticDensity model(ud);
  spin::MomentEstimates mom = spin::order_stat_moments(s, 4, 6, model);
  QpProblem p = spin::build_problem(mom, 5, 2, 0.5, s);

  Eigen::VectorXd w0;
  const Eigen::MatrixXd N = spin::reduce_feasible_set(p, &w0);
  CHECK(N.cols() == 1);
  CHECK((p.A_eq * w0 - p.b_eq).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((p.A_eq * N).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((N.transpose() * N - Eigen::MatrixXd::Identity(1, 1)).cwiseAbs().maxCoeff() < 1e-12);

  QpSolution sol = spin::solve(p);
  // equal spacing on both sides forces mirror-equal shoulders
  CHECK(sol.weights[0] == doctest::Approx(sol.weights[2]).epsilon(1e-9));
  CHECK(sol.weights[1] >= sol.weights[0] - 1e-9);
  CHECK(sol.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  // minimal window: most of the mass stays on the center
  CHECK(sol.weights[1] >= 1.0 / 3.0 - 1e-9);
  const double endpoint = 0.4 * sol.weights[0] + 0.5 * sol.weights[1] + 0.6 * sol.weights[2];
  CHECK(endpoint >= 0.4);
  CHECK(endpoint <= 0.6);
}

TEST_CASE("duplicated window values keep the feasible dimension of the distinct case") {
  spin::NormalDist nd(0.0, 1.0);
  spin::AnalyticDensity model(nd);

  SortedSample distinct = SortedSample::from_sorted({-2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0});
  spin::MomentEstimates m1 = spin::order_stat_moments(distinct, 2, 6, model);
  QpProblem p1 = spin::build_problem(m1, 4, 4, 0.1, distinct);
  CHECK(spin::reduce_feasible_set(p1).cols() == 1);

  SortedSample dup = SortedSample::from_sorted({-2.0, -1.0, -1.0, 0.0, 1.0, 2.0, 4.0});
  spin::MomentEstimates m2 = spin::order_stat_moments(dup, 2, 6, model);
  QpProblem p2 = spin::build_problem(m2, 4, 4, 0.0, dup);
  CHECK(spin::reduce_feasible_set(p2).cols() == 1);

  QpSolution sol = spin::solve(p2);
  // the tied pair shares one weight
  CHECK(std::abs(sol.weights[0] - sol.weights[1]) < 1e-8);
  CHECK(testutil::max_equality_residual(p2, sol.weights) < 1e-9);
}

TEST_CASE("a window of identical values pins the uniform solution") {
  std::vector<double> v;
  for (int i = 1; i <= 14; ++i) v.push_back(static_cast<double>(i));
  for (int i = 0; i < 15; ++i) v.push_back(20.0);
  for (int i = 0; i < 7; ++i) v.push_back(30.0 + i);
  SortedSample s = SortedSample::from_sorted(std::move(v));
  REQUIRE(s.n() == 36);

  spin::KdeDensity kde(s);
  spin::MomentEstimates mom = spin::order_stat_moments(s, 19, 25, kde);
  QpProblem p = spin::build_problem(mom, 22, 6, 20.0, s);

  Eigen::VectorXd w0;
  const Eigen::MatrixXd N = spin::reduce_feasible_set(p, &w0);
  CHECK(N.cols() == 0);  // the equality rows already pin the point

  QpSolution sol = spin::solve(p);
  for (int i = 0; i < 7; ++i)
    CHECK(sol.weights[i] == doctest::Approx(1.0 / 7.0).epsilon(1e-9));
  CHECK(sol.kkt_residual < 1e-7);
}

TEST_CASE("a fully tied sample cannot pose a problem") {
  SortedSample s = spin::sort_sample(std::vector<double>(30, 2.0));
  spin::NormalDist nd(2.0, 1.0);
  spin::AnalyticDensity model(nd);
  spin::MomentEstimates mom = spin::order_stat_moments(
      SortedSample::from_sorted({1.0, 2.0, 3.0}), 1, 3, model);
  CHECK_THROWS_AS(spin::build_problem(mom, 2, 2, 2.0, s), QpFailure);
}

TEST_CASE("solved windows satisfy constraints, certificates, and the line-search oracle") {
  spin::RngStream rng(2026);
  int oracle_checked = 0, oracle_skipped = 0;
  for (int trial = 0; trial < 300; ++trial) {
    spin::RngStream case_rng = rng.substream(static_cast<std::uint64_t>(trial));
    testutil::WindowCase wc = testutil::random_window_case(case_rng);
    QpSolution sol;
    try {
      sol = spin::solve(wc.problem);
    } catch (const QpFailure& e) {
      FAIL("solver failed on a production-shaped window: " << e.what());
      continue;
    }

    CHECK(testutil::max_equality_residual(wc.problem, sol.weights) <= 1e-9);
    CHECK(testutil::max_inequality_violation(wc.problem, sol.weights) <= 1e-9);
    CHECK(sol.kkt_residual <= 1e-7);
    CHECK(sol.weights.minCoeff() >= -1e-8);
    CHECK(sol.weights.sum() == doctest::Approx(1.0).epsilon(1e-8));

    // tied order statistics share weight
    const int m = wc.problem.size();
    for (int k = 1; k < m; ++k) {
      if (wc.sample.at(wc.problem.window_lo + k) == wc.sample.at(wc.problem.window_lo + k - 1))
        CHECK(std::abs(sol.weights[k] - sol.weights[k - 1]) < 1e-7);
    }

    // run-averaged weights form a valid single-peak kernel
    spin::WeightKernel kern = testutil::grouped_kernel(wc.sample, wc.problem, sol.weights);
    std::string why;
    const bool ok = kern.is_valid(&why);
    CHECK(ok);
    if (!ok) MESSAGE("kernel invalid: " << why);

    // independent minimum over the reduced line
    const auto oracle = testutil::brute_force_objective(wc.problem);
    if (oracle) {
      ++oracle_checked;
      CHECK(std::abs(sol.objective - *oracle) <= 1e-6);
      CHECK(sol.objective <= *oracle + 1e-9);
    } else {
      ++oracle_skipped;
    }

    // no feasible point does better
    spin::RngStream probe = case_rng.substream(9);
    for (int t = 0; t < 20; ++t) {
      const auto w = testutil::random_feasible_point(wc.problem, probe);
      if (!w) break;
      CHECK(sol.objective <= spin::qp_objective(wc.problem, *w) + 1e-9);
    }
  }
  CHECK(oracle_checked >= 285);  // the reduced space is one-dimensional in all but corner cases
  CHECK(oracle_skipped <= 15);
}

TEST_CASE("solutions transport exactly under affine maps of the draws") {
  auto nd = spin::make_distribution("normal");
  SortedSample s = spin::sample_iid(*nd, 120, 77);
  std::vector<double> mapped = s.values;
  for (double& x : mapped) x = 2.5 * x - 3.0;
  SortedSample t = spin::sort_sample(mapped);

  auto endpoint_of = [](const SortedSample& sample) {
    const auto [ivl, win] = spin::empirical_shortest(sample, 0.1);
    const int b = spin::default_bandwidth(sample.n());
    const int lo = std::max(1, win.lower_index - b / 2);
    const int hi = std::min(sample.n(), win.lower_index + b / 2);
    spin::KdeDensity kde(sample);
    spin::MomentEstimates mom = spin::order_stat_moments(sample, lo, hi, kde);
    QpProblem p = spin::build_problem(mom, win.lower_index, b, ivl.lower, sample);
    QpSolution sol = spin::solve(p);
    double e = 0.0;
    for (int k = 0; k < p.size(); ++k) e += sol.weights[k] * sample.at(lo + k);
    return e;
  };

  const double e1 = endpoint_of(s);
  const double e2 = endpoint_of(t);
  CHECK(e2 == doctest::Approx(2.5 * e1 - 3.0).epsilon(1e-6));
}

TEST_CASE("problem dumps carry the pieces needed to rebuild the instance") {
  SortedSample s = grid_sample(9);
  spin::UniformDist ud;
  spin::AnalyticDensity model(ud);
  spin::MomentEstimates mom = spin::order_stat_moments(s, 4, 6, model);
  QpProblem p = spin::build_problem(mom, 5, 2, 0.5, s);
  QpSolution sol = spin::solve(p);

  const std::string plain = spin::dump_problem(p);
  CHECK(plain.find("window [4, 6]") != std::string::npos);
  CHECK(plain.find("ridge") != std::string::npos);
  CHECK(plain.find("A_eq | b_eq:") != std::string::npos);
  CHECK(plain.find("weights:") == std::string::npos);

  const std::string with_sol = spin::dump_problem(p, &sol);
  CHECK(with_sol.find("weights:") != std::string::npos);
  CHECK(with_sol.find("kkt_residual") != std::string::npos);
}
