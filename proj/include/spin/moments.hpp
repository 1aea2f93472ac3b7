#ifndef SPIN_MOMENTS_HPP_
#define SPIN_MOMENTS_HPP_

#include <vector>

#include "spin/distributions.hpp"
#include "spin/samples.hpp"

namespace spin {

// Density estimate surface the moment formulas consume.  Implementations must
// be pure/read-only after construction.
class DensityModel {
 public:
  virtual ~DensityModel() = default;
  virtual double density(double x) const = 0;
  virtual double density_deriv(double x) const = 0;
  // Fused evaluation; overridden where one pass is cheaper than two.
  virtual void density_pair(double x, double& f, double& fprime) const {
    f = density(x);
    fprime = density_deriv(x);
  }
};

// Gaussian-kernel density estimate with Silverman's bandwidth
// 0.9 * min(sd, IQR/1.34) * n^(-1/5).  Evaluation truncates the kernel at
// 8 bandwidths, where the Gaussian tail is ~1e-15 of its peak.
class KdeDensity final : public DensityModel {
 public:
  explicit KdeDensity(const SortedSample& sample);  // throws on zero-variance input
  double bandwidth() const { return h_; }
  double density(double x) const override;
  double density_deriv(double x) const override;
  void density_pair(double x, double& f, double& fprime) const override;

 private:
  std::vector<double> data_;
  double h_;
};

// Analytic density plug-in used by exactness oracles and tests.
class AnalyticDensity final : public DensityModel {
 public:
  explicit AnalyticDensity(const Distribution& dist) : dist_(dist) {}
  double density(double x) const override { return dist_.pdf(x); }
  double density_deriv(double x) const override { return dist_.pdf_deriv(x); }

 private:
  const Distribution& dist_;
};

// Curvature plug-in for the second-order mean correction.  Standard uses the
// identity Q''(p) = -f'(Q)/f(Q)^3; Ratio reproduces the alternative Q/f(Q)^2
// form, kept behind a switch for comparability.
enum class QppMode { Standard, Ratio };

// First two moments of the order statistics over a window, from the expansions
//   E X_(i)   = Q_i + p_i q_i / (2(n+2)) * Q_i''
//   Var X_(i) = p_i q_i / (n+2) * Q_i'^2
//   cov(X_(i), X_(j)) = p_i q_j / (n+2) * Q_i' Q_j'   (i < j)
// with p_i = i/(n+1), q_i = 1-p_i, Q_i the sample order statistic, and
// Q_i' = 1/f(Q_i) from the supplied density model.
struct MomentEstimates {
  int window_lo = 0;  // 1-based order-statistic indices, inclusive
  int window_hi = 0;
  int n = 0;
  std::vector<double> p, q, Q, Qp, Qpp;  // indexed window-relative
  int clamped_count = 0;                 // density-floor activations

  int size() const { return window_hi - window_lo + 1; }
  double mean(int i) const;              // E X_(i), absolute 1-based index
  double variance(int i) const;
  double covariance(int i, int j) const;
};

// Computes the window moments.  The density floor 1e-4/(sample range) bounds
// Q' = 1/f in thin tails; activations are counted in clamped_count.
MomentEstimates order_stat_moments(const SortedSample& sample, int window_lo, int window_hi,
                                   const DensityModel& model, QppMode mode = QppMode::Standard);

// One-shot Gaussian KDE evaluation (builds the estimate, evaluates, discards).
double kde_density_at(const SortedSample& sample, double x);

}  // namespace spin

#endif
