#include "spin/qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace spin {

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kStationarityTol = 1e-7;

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Strictly increasing copy of the window values; duplicates get a
// machine-scale bump so the collinearity rows keep nonzero denominators.
void normalize_row(Eigen::MatrixXd& A, int row) {
  const double m = A.row(row).cwiseAbs().maxCoeff();
  if (m > 0.0) A.row(row) /= m;
}

}  // namespace

QpProblem build_problem(const MomentEstimates& moments, int center_index, int bandwidth_b,
                        double target_quantile, const SortedSample& sample, bool bias_corrected) {
  const int n = sample.n();
  if (bandwidth_b < 2) throw QpFailure("bandwidth must be >= 2");
  const int lo = std::max(1, center_index - bandwidth_b / 2);
  const int hi = std::min(n, center_index + bandwidth_b / 2);
  const int m = hi - lo + 1;
  if (center_index < 1 || center_index > n) throw QpFailure("center index outside the sample");
  if (m < 3) throw QpFailure("clipped window covers fewer than 3 order statistics");
  if (moments.window_lo > lo || moments.window_hi < hi)
    throw QpFailure("moment estimates do not cover the window");

  QpProblem prob;
  prob.window_lo = lo;
  prob.window_hi = hi;
  prob.center_index = center_index;
  prob.target_quantile = target_quantile;

  // Objective: E (sum_i w_i X_(i) - T)^2 = w' (Sigma + mu mu') w - 2 T mu' w + T^2
  // => D = 2 (Sigma + mu mu'), d = 2 T mu.
  Eigen::VectorXd mu(m);
  for (int k = 0; k < m; ++k) {
    const int i = lo + k;
    mu[k] = bias_corrected ? moments.mean(i) : moments.Q[static_cast<std::size_t>(i - moments.window_lo)];
  }
  Eigen::MatrixXd Sigma(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      const double c = moments.covariance(lo + a, lo + b);
      Sigma(a, b) = c;
      Sigma(b, a) = c;
    }
  prob.D = 2.0 * (Sigma + mu * mu.transpose());
  prob.d = 2.0 * target_quantile * mu;

  prob.ridge = 1e-10 * prob.D.trace() / m;
  prob.D.diagonal().array() += prob.ridge;

  // D + ridge must be positive definite for the active-set solve to certify.
  Eigen::LLT<Eigen::MatrixXd> llt(prob.D);
  if (llt.info() != Eigen::Success) throw QpFailure("quadratic term is not positive definite");

  if (!(sample.max() - sample.min() > 0.0)) throw QpFailure("all sample values are tied");
  std::vector<double> xs(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) xs[static_cast<std::size_t>(k)] = sample.at(lo + k);
  const int c = center_index - lo;

  // Tied order statistics (routine in bootstrap resamples) must carry equal
  // weight, and the side lines must run through the distinct values only:
  // treating a tie run as ordinary points with epsilon spacing leaves the
  // slopes before and after the run uncoupled, so a certified optimum can
  // tilt an outer segment and break unimodality. Group the window into runs
  // of equal values first; all geometric rows are then built on the runs.
  std::vector<int> run_first;  // window-relative index of each run's first member
  std::vector<int> run_of(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    if (k == 0 || xs[static_cast<std::size_t>(k)] != xs[static_cast<std::size_t>(k - 1)])
      run_first.push_back(k);
    run_of[static_cast<std::size_t>(k)] = static_cast<int>(run_first.size()) - 1;
  }
  const int nruns = static_cast<int>(run_first.size());
  const int rc = run_of[static_cast<std::size_t>(c)];
  const auto run_value = [&](int r) { return xs[static_cast<std::size_t>(run_first[static_cast<std::size_t>(r)])]; };

  // Equality rows: sum-to-one; equal weights within each tie run; per-side
  // collinearity of the distinct (value, weight) pairs as second-difference
  // rows; equal-magnitude slopes at the peak.
  const int tie_rows = m - nruns;
  const int left_triples = std::max(0, rc - 1);
  const int right_triples = std::max(0, (nruns - 1 - rc) - 1);
  const bool has_symmetry = (rc > 0 && rc < nruns - 1);
  const int e = 1 + tie_rows + left_triples + right_triples + (has_symmetry ? 1 : 0);
  prob.A_eq = Eigen::MatrixXd::Zero(e, m);
  prob.b_eq = Eigen::VectorXd::Zero(e);
  int row = 0;
  prob.A_eq.row(row).setOnes();
  prob.b_eq[row] = 1.0;
  ++row;
  for (int k = 1; k < m; ++k) {
    if (xs[static_cast<std::size_t>(k)] != xs[static_cast<std::size_t>(k - 1)]) continue;
    prob.A_eq(row, k - 1) = 1.0;
    prob.A_eq(row, k) = -1.0;
    ++row;
  }
  auto add_triple = [&](int r) {
    const double v0 = run_value(r - 1), v1 = run_value(r), v2 = run_value(r + 1);
    prob.A_eq(row, run_first[static_cast<std::size_t>(r - 1)]) = v2 - v1;
    prob.A_eq(row, run_first[static_cast<std::size_t>(r)]) = -(v2 - v0);
    prob.A_eq(row, run_first[static_cast<std::size_t>(r + 1)]) = v1 - v0;
    normalize_row(prob.A_eq, row);
    ++row;
  };
  for (int r = 1; r <= rc - 1; ++r) add_triple(r);
  for (int r = rc + 1; r <= nruns - 2; ++r) add_triple(r);
  if (has_symmetry) {
    // (v_q-v_c)(w_c - w_p) + (v_c - v_p)(w_q - w_c) = 0 for the distinct
    // values p < c < q adjacent to the peak's.
    const double dl = run_value(rc) - run_value(rc - 1);
    const double dr = run_value(rc + 1) - run_value(rc);
    prob.A_eq(row, run_first[static_cast<std::size_t>(rc - 1)]) = -dr;
    prob.A_eq(row, c) = dr - dl;
    prob.A_eq(row, run_first[static_cast<std::size_t>(rc + 1)]) = dl;
    normalize_row(prob.A_eq, row);
    ++row;
  }

  // Inequalities: nonnegative edge weights; peak dominates the adjacent
  // distinct value (mirrored to the surviving side when the window is
  // clipped, or the center's tie run reaches the edge).
  prob.A_ineq = Eigen::MatrixXd::Zero(3, m);
  prob.b_ineq = Eigen::VectorXd::Zero(3);
  prob.A_ineq(0, 0) = 1.0;
  prob.A_ineq(1, m - 1) = 1.0;
  prob.A_ineq(2, c) = 1.0;
  if (rc < nruns - 1) {
    prob.A_ineq(2, run_first[static_cast<std::size_t>(rc + 1)]) = -1.0;
  } else if (rc > 0) {
    prob.A_ineq(2, run_first[static_cast<std::size_t>(rc - 1)]) = -1.0;
  } else {
    // Entire window is one tied plateau; keep a (vacuous) adjacent
    // comparison so the constraint count stays fixed.
    prob.A_ineq(2, c > 0 ? c - 1 : c + 1) = -1.0;
  }
  return prob;
}

Eigen::MatrixXd reduce_feasible_set(const QpProblem& problem, Eigen::VectorXd* particular) {
  const int m = problem.size();
  if (problem.A_eq.rows() == 0) {
    if (particular) *particular = Eigen::VectorXd::Zero(m);
    return Eigen::MatrixXd::Identity(m, m);
  }
  if (particular) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(problem.A_eq);
    *particular = cod.solve(problem.b_eq);
    if ((problem.A_eq * *particular - problem.b_eq).cwiseAbs().maxCoeff() > kPrimalTol)
      throw QpFailure("equality constraints are inconsistent");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(problem.A_eq);
  // full column rank pins a unique feasible point; kernel() would hand back a
  // sentinel zero column here, not an empty basis
  if (lu.dimensionOfKernel() == 0) return Eigen::MatrixXd(m, 0);
  const Eigen::MatrixXd K = lu.kernel();
  // Orthonormal basis keeps the reduced problem and its KKT residuals on the
  // same scale as the full-space gradient.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(K);
  const Eigen::MatrixXd Q = qr.householderQ();
  return Q.leftCols(K.cols());
}

double qp_objective(const QpProblem& problem, const Eigen::VectorXd& w) {
  return 0.5 * w.dot(problem.D * w) - problem.d.dot(w);
}

QpSolution solve(const QpProblem& problem) {
  const int m = problem.size();
  if (problem.D.rows() != m || problem.D.cols() != m || problem.d.size() != m)
    throw QpFailure("problem dimensions are inconsistent");

  Eigen::VectorXd w0;
  const Eigen::MatrixXd N = reduce_feasible_set(problem, &w0);
  const int r = static_cast<int>(N.cols());
  const int kIneq = static_cast<int>(problem.A_ineq.rows());
  if (kIneq > 20) throw QpFailure("too many inequality rows for subset enumeration");

  const Eigen::MatrixXd H = N.transpose() * problem.D * N;
  const Eigen::VectorXd g = N.transpose() * (problem.d - problem.D * w0);
  const Eigen::MatrixXd AiN = problem.A_ineq * N;
  const Eigen::VectorXd bi0 = problem.b_ineq - problem.A_ineq * w0;

  bool found = false;
  double best_obj = 0.0;
  Eigen::VectorXd best_w;
  std::vector<int> best_active;

  // Every subset solution below is the exact minimizer over {equalities} +
  // {subset rows as equalities}; any one that is also primal feasible bounds
  // the optimum from above, and the optimum's own active set is among the
  // subsets — so the best primal-feasible candidate IS the optimum.  Dual
  // signs are certified once at the end.
  for (unsigned mask = 0; mask < (1u << kIneq); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < kIneq; ++i)
      if (mask & (1u << i)) act.push_back(i);
    const int s = static_cast<int>(act.size());
    if (s > r) continue;  // overdetermined in the reduced space

    Eigen::VectorXd w;
    if (r + s == 0) {
      w = w0;
    } else {
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(r + s, r + s);
      kkt.topLeftCorner(r, r) = H;
      Eigen::VectorXd rhs(r + s);
      rhs.head(r) = g;
      for (int i = 0; i < s; ++i) {
        kkt.block(r + i, 0, 1, r) = AiN.row(act[static_cast<std::size_t>(i)]);
        kkt.block(0, r + i, r, 1) = AiN.row(act[static_cast<std::size_t>(i)]).transpose();
        rhs[r + i] = bi0[act[static_cast<std::size_t>(i)]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
      if (!lu.isInvertible()) continue;
      const Eigen::VectorXd zl = lu.solve(rhs);
      w = w0 + N * zl.head(r);
    }

    if (kIneq > 0 && ((problem.A_ineq * w - problem.b_ineq).array() < -kPrimalTol).any())
      continue;

    const double obj = qp_objective(problem, w);
    if (!found || obj < best_obj) {
      found = true;
      best_obj = obj;
      best_w = w;
      best_active = act;
    }
  }
  if (!found) throw QpFailure("no feasible KKT point over the active-set enumeration");

  // Certify.  Primal feasibility is checked against the original rows.
  // Stationarity is checked in the reduced parameterization: tied windows
  // make the jittered equality rows nearly dependent, so the exact full-space
  // multipliers can reach ~1/sigma_min and no double-precision fit of them is
  // meaningful; projected onto the orthonormal null-space basis the KKT
  // system stays on the gradient's own scale.
  const int e = static_cast<int>(problem.A_eq.rows());
  const int s = static_cast<int>(best_active.size());
  const Eigen::VectorXd grad = problem.D * best_w - problem.d;
  const Eigen::VectorXd g_red = N.transpose() * grad;
  double stationarity = 0.0;
  if (s > 0) {
    Eigen::MatrixXd M(r, s);
    for (int i = 0; i < s; ++i)
      M.col(i) = AiN.row(best_active[static_cast<std::size_t>(i)]).transpose();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
    const Eigen::VectorXd nu = cod.solve(g_red);
    stationarity = (M * nu - g_red).cwiseAbs().maxCoeff();
    const double dual_tol = 1e-6 * (1.0 + grad.cwiseAbs().maxCoeff());
    for (int i = 0; i < s; ++i)
      if (nu[i] < -dual_tol) throw QpFailure("active multiplier fit is negative");
  } else if (r > 0) {
    stationarity = g_red.cwiseAbs().maxCoeff();
  }

  double primal = 0.0;
  if (e > 0) primal = (problem.A_eq * best_w - problem.b_eq).cwiseAbs().maxCoeff();
  double ineq_viol = 0.0;
  if (kIneq > 0)
    ineq_viol = std::max(0.0, -((problem.A_ineq * best_w - problem.b_ineq).minCoeff()));
  if (primal > kPrimalTol || ineq_viol > kPrimalTol)
    throw QpFailure("solution violates constraints beyond tolerance");
  if (stationarity > kStationarityTol)
    throw QpFailure("stationarity residual exceeds tolerance: " + g17(stationarity) +
                    " (grad inf-norm " + g17(grad.cwiseAbs().maxCoeff()) + ")");

  QpSolution sol;
  sol.weights = best_w;
  sol.objective = best_obj;
  sol.active_set = best_active;
  sol.kkt_residual = std::max({stationarity, primal, ineq_viol});
  return sol;
}

std::string dump_problem(const QpProblem& problem, const QpSolution* solution) {
  std::ostringstream os;
  const int m = problem.size();
  os << "window [" << problem.window_lo << ", " << problem.window_hi << "] center "
     << problem.center_index << " target " << g17(problem.target_quantile) << " ridge "
     << g17(problem.ridge) << "\n";
  os << "D (" << m << "x" << m << "):\n";
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) os << (j ? " " : "") << g17(problem.D(i, j));
    os << "\n";
  }
  os << "d:";
  for (int i = 0; i < m; ++i) os << " " << g17(problem.d[i]);
  os << "\nA_eq | b_eq:\n";
  for (int i = 0; i < problem.A_eq.rows(); ++i) {
    for (int j = 0; j < m; ++j) os << (j ? " " : "") << g17(problem.A_eq(i, j));
    os << " | " << g17(problem.b_eq[i]) << "\n";
  }
  os << "A_ineq | b_ineq:\n";
  for (int i = 0; i < problem.A_ineq.rows(); ++i) {
    for (int j = 0; j < m; ++j) os << (j ? " " : "") << g17(problem.A_ineq(i, j));
    os << " | " << g17(problem.b_ineq[i]) << "\n";
  }
  if (solution) {
    os << "weights:";
    for (int i = 0; i < solution->weights.size(); ++i) os << " " << g17(solution->weights[i]);
    os << "\nobjective " << g17(solution->objective) << " kkt_residual "
       << g17(solution->kkt_residual) << " active {";
    for (std::size_t i = 0; i < solution->active_set.size(); ++i)
      os << (i ? "," : "") << solution->active_set[i];
    os << "}\n";
  }
  return os.str();
}

}  // namespace spin
