// Shared test helpers: distribution-fit statistics, independent QP oracles,
// and a generator for solver problems posed the same way production poses them.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spin/distributions.hpp"
#include "spin/empirical.hpp"
#include "spin/moments.hpp"
#include "spin/qp.hpp"
#include "spin/rng.hpp"
#include "spin/samples.hpp"
#include "spin/spin.hpp"

namespace testutil {

// One-sample Kolmogorov-Smirnov statistic against a reference CDF.
// `sorted` must be ascending.
inline double ks_statistic(const std::vector<double>& sorted,
                           const std::function<double(double)>& cdf) {
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sd_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Worst |A_eq w - b_eq| over the equality rows.
inline double max_equality_residual(const spin::QpProblem& prob, const Eigen::VectorXd& w) {
  if (prob.A_eq.rows() == 0) return 0.0;
  return (prob.A_eq * w - prob.b_eq).cwiseAbs().maxCoeff();
}

// Worst violation of A_ineq w >= b_ineq (positive means violated).
inline double max_inequality_violation(const spin::QpProblem& prob, const Eigen::VectorXd& w) {
  if (prob.A_ineq.rows() == 0) return 0.0;
  return (prob.b_ineq - prob.A_ineq * w).maxCoeff();
}

// Equality-feasible affine set, parameterized independently of the production
// solver: min-norm particular solution and null-space basis both come from an
// SVD of A_eq rather than the LU/QR path the solver uses.
struct AffineFeasible {
  Eigen::VectorXd w0;  // satisfies A_eq w0 = b_eq
  Eigen::MatrixXd N;   // orthonormal columns spanning ker(A_eq)
};

inline AffineFeasible svd_feasible_set(const spin::QpProblem& prob) {
  const int m = prob.size();
  AffineFeasible out;
  if (prob.A_eq.rows() == 0) {
    out.w0 = Eigen::VectorXd::Zero(m);
    out.N = Eigen::MatrixXd::Identity(m, m);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(prob.A_eq,
                                        Eigen::ComputeThinU | Eigen::ComputeFullV);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  const double tol = 1e-12 * std::max(1.0, smax);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol) ++rank;
  out.w0 = svd.solve(prob.b_eq);
  if ((prob.A_eq * out.w0 - prob.b_eq).cwiseAbs().maxCoeff() > 1e-8)
    throw std::runtime_error("oracle: equality system inconsistent");
  out.N = svd.matrixV().rightCols(prob.A_eq.cols() - rank);
  return out;
}

// Global minimum of the QP restricted to a one-dimensional (or zero-
// dimensional) equality-feasible set, with the inequality rows intersected as
// an interval in the free coordinate. Returns nullopt when the free space has
// dimension >= 2 (no closed form used; callers count and bound those cases).
inline std::optional<double> brute_force_objective(const spin::QpProblem& prob) {
  const AffineFeasible aff = svd_feasible_set(prob);
  const auto r = static_cast<int>(aff.N.cols());
  if (r == 0) return spin::qp_objective(prob, aff.w0);
  if (r > 1) return std::nullopt;

  const Eigen::VectorXd v = aff.N.col(0);
  double smin = -std::numeric_limits<double>::infinity();
  double smax = std::numeric_limits<double>::infinity();
  for (int i = 0; i < prob.A_ineq.rows(); ++i) {
    const double slope = prob.A_ineq.row(i).dot(v);
    const double gap = prob.b_ineq(i) - prob.A_ineq.row(i).dot(aff.w0);
    if (std::abs(slope) < 1e-14) {
      if (gap > 1e-10) throw std::runtime_error("oracle: inequality infeasible on the line");
      continue;
    }
    if (slope > 0.0)
      smin = std::max(smin, gap / slope);
    else
      smax = std::min(smax, gap / slope);
  }
  if (smin > smax + 1e-12) throw std::runtime_error("oracle: empty feasible interval");

  // Unconstrained minimizer along the line, clamped into the interval; the
  // objective is convex in s so clamping is exact.
  const double curv = v.dot(prob.D * v);
  double s = 0.0;
  if (curv > 0.0) s = (v.dot(prob.d) - v.dot(prob.D * aff.w0)) / curv;
  s = std::clamp(s, smin, smax);
  return spin::qp_objective(prob, aff.w0 + s * v);
}

// Draws a random point of the equality-feasible interval (r == 1 only).
inline std::optional<Eigen::VectorXd> random_feasible_point(const spin::QpProblem& prob,
                                                            spin::RngStream& rng) {
  const AffineFeasible aff = svd_feasible_set(prob);
  if (aff.N.cols() != 1) return std::nullopt;
  const Eigen::VectorXd v = aff.N.col(0);
  double smin = -1e3, smax = 1e3;
  for (int i = 0; i < prob.A_ineq.rows(); ++i) {
    const double slope = prob.A_ineq.row(i).dot(v);
    const double gap = prob.b_ineq(i) - prob.A_ineq.row(i).dot(aff.w0);
    if (std::abs(slope) < 1e-14) continue;
    if (slope > 0.0)
      smin = std::max(smin, gap / slope);
    else
      smax = std::min(smax, gap / slope);
  }
  if (smin > smax) return std::nullopt;
  const double s = smin + (smax - smin) * rng.uniform01();
  return aff.w0 + s * v;
}

// Weight kernel for a solved problem with tied order statistics averaged
// within each run of equal values, mirroring how the interval estimator
// treats solver output before validating shape.
inline spin::WeightKernel grouped_kernel(const spin::SortedSample& sample,
                                         const spin::QpProblem& prob,
                                         const Eigen::VectorXd& w) {
  spin::WeightKernel k;
  k.center_index = prob.center_index;
  k.window_lo = prob.window_lo;
  k.window_hi = prob.window_hi;
  k.bandwidth_b = prob.window_hi - prob.window_lo;
  k.weights.assign(w.data(), w.data() + w.size());
  const int m = static_cast<int>(k.weights.size());
  for (int i = 0; i < m;) {
    int j = i + 1;
    while (j < m && sample.at(prob.window_lo + j) == sample.at(prob.window_lo + i)) ++j;
    if (j - i > 1) {
      double s = 0.0;
      for (int t = i; t < j; ++t) s += k.weights[static_cast<std::size_t>(t)];
      const double avg = s / static_cast<double>(j - i);
      for (int t = i; t < j; ++t) k.weights[static_cast<std::size_t>(t)] = avg;
    }
    i = j;
  }
  return k;
}

// A solver problem posed the way production poses them: draws from a named
// family (optionally bootstrap-resampled, which introduces ties), a window
// centered on an empirical interval endpoint, moments from the Gaussian
// kernel density fit, and the empirical endpoint as the target value.
struct WindowCase {
  spin::SortedSample sample;
  spin::QpProblem problem;
};

inline WindowCase random_window_case(spin::RngStream& rng) {
  static const char* kDists[] = {"normal", "t5", "gamma3", "exponential", "uniform"};
  const auto dist = spin::make_distribution(kDists[rng.uniform_below(5)]);
  const int n = 30 + static_cast<int>(rng.uniform_below(371));
  static const double kAlphas[] = {0.05, 0.1, 0.2, 0.5};
  const double alpha = kAlphas[rng.uniform_below(4)];

  spin::RngStream draw = rng.substream(1);
  spin::SortedSample sample = spin::sample_iid(*dist, n, draw);
  if (rng.uniform01() < 0.5) {
    // bootstrap resample, the tie-heavy regime the solver must survive
    std::vector<double> res(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      res[static_cast<std::size_t>(i)] =
          sample.at(1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n))));
    sample = spin::sort_sample(res);
  }

  const auto [ivl, win] = spin::empirical_shortest(sample, alpha);
  const bool lower_side = rng.uniform01() < 0.5;
  const int center = lower_side ? win.lower_index : win.upper_index;
  const double target = lower_side ? ivl.lower : ivl.upper;

  const int b = spin::default_bandwidth(n);
  const int lo = std::max(1, center - b / 2);
  const int hi = std::min(n, center + b / 2);

  spin::KdeDensity kde(sample);
  const auto mode = rng.uniform01() < 0.2 ? spin::QppMode::Ratio : spin::QppMode::Standard;
  const spin::MomentEstimates mom = spin::order_stat_moments(sample, lo, hi, kde, mode);
  const bool bias_corrected = rng.uniform01() < 0.8;

  spin::QpProblem prob = spin::build_problem(mom, center, b, target, sample, bias_corrected);
  return WindowCase{std::move(sample), std::move(prob)};
}

}  // namespace testutil
