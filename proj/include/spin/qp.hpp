#ifndef SPIN_QP_HPP_
#define SPIN_QP_HPP_

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "spin/moments.hpp"
#include "spin/samples.hpp"

namespace spin {

// Raised when a weight problem cannot be built or solved to tolerance.  The
// bootstrap loop treats these as droppable per-replicate failures.
struct QpFailure : std::runtime_error {
  explicit QpFailure(const std::string& what) : std::runtime_error(what) {}
};

// minimize 1/2 w'Dw - d'w  s.t.  A_eq w = b_eq,  A_ineq w >= b_ineq.
// D and d encode the mean-squared error of the weighted order-statistic
// endpoint against the target quantile; the constraints pin the weights to a
// piecewise-linear unimodal (triangle) profile over the window.
struct QpProblem {
  Eigen::MatrixXd D;  // m x m symmetric, ridge already applied
  Eigen::VectorXd d;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_ineq;  // rows a with a.w >= b
  Eigen::VectorXd b_ineq;
  int window_lo = 0;  // 1-based order-statistic indices, inclusive
  int window_hi = 0;
  int center_index = 0;
  double target_quantile = 0.0;
  double ridge = 0.0;  // diagonal shift added to D

  int size() const { return window_hi - window_lo + 1; }
};

struct QpSolution {
  Eigen::VectorXd weights;
  double objective = 0.0;
  std::vector<int> active_set;  // binding inequality row indices
  // max of: equality residual and inequality violation (both against the
  // original rows), and the stationarity residual of the KKT system reduced
  // onto the equality null space.  The reduction keeps the measure on the
  // gradient's scale even when near-tied sample spacings make the equality
  // rows ill-conditioned.
  double kkt_residual = 0.0;
};

// Assembles the problem for one endpoint.  The window is
// [center-b/2, center+b/2] clipped to [1, n] and must cover >= 3 points; the
// supplied moments must cover it.  bias_corrected selects whether the linear
// and quadratic coefficients use the second-order-corrected order-statistic
// means (default) or the plain quantile plug-in.  Tied values inside the
// window (routine in bootstrap resamples) are grouped: they share one weight,
// and the side lines run through the distinct values.
QpProblem build_problem(const MomentEstimates& moments, int center_index, int bandwidth_b,
                        double target_quantile, const SortedSample& sample,
                        bool bias_corrected = true);

// Null-space basis of the equality rows (m x r).  When `particular` is given
// it receives the minimum-norm solution of A_eq w = b_eq.  The constraint
// structure generically leaves r = 1: the free parameter is the triangle slope.
Eigen::MatrixXd reduce_feasible_set(const QpProblem& problem, Eigen::VectorXd* particular = nullptr);

// Exact active-set solve: enumerates active subsets of the (<= 3) inequality
// rows in the reduced space and returns the best KKT point.  Verifies primal
// feasibility to 1e-9 and the stationarity residual to 1e-7; throws QpFailure
// when no subset yields a certified optimum.
QpSolution solve(const QpProblem& problem);

double qp_objective(const QpProblem& problem, const Eigen::VectorXd& w);

// Plain-text dump of (D, d, constraints, solution) for debugging.
std::string dump_problem(const QpProblem& problem, const QpSolution* solution = nullptr);

}  // namespace spin

#endif
