#ifndef SPIN_DISTRIBUTIONS_HPP_
#define SPIN_DISTRIBUTIONS_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "spin/rng.hpp"
#include "spin/samples.hpp"

namespace spin {

// Analytic test distribution: density, cdf, quantile, and a seeded sampler.
class Distribution {
 public:
  virtual ~Distribution() = default;
  virtual std::string name() const = 0;
  virtual double pdf(double x) const = 0;
  // d/dx pdf(x); default is a central difference, overridden where exact.
  virtual double pdf_deriv(double x) const;
  virtual double cdf(double x) const = 0;
  virtual double quantile(double p) const = 0;  // p in (0,1)
  virtual double draw(RngStream& rng) const = 0;
  // Set when the density is symmetric: the shortest interval solves in closed form.
  virtual std::optional<double> symmetry_center() const { return std::nullopt; }
  virtual double support_lower() const;  // -inf when unbounded
  virtual double support_upper() const;
  // Flat densities (uniform) have no unique shortest interval.
  virtual bool flat_density() const { return false; }
};

class NormalDist final : public Distribution {
 public:
  NormalDist(double mu, double sigma);
  std::string name() const override;
  double pdf(double x) const override;
  double pdf_deriv(double x) const override;
  double cdf(double x) const override;
  double quantile(double p) const override;
  double draw(RngStream& rng) const override;
  std::optional<double> symmetry_center() const override { return mu_; }

 private:
  double mu_, sigma_;
};

class StudentTDist final : public Distribution {
 public:
  explicit StudentTDist(double nu);
  std::string name() const override;
  double pdf(double x) const override;
  double cdf(double x) const override;
  double quantile(double p) const override;
  double draw(RngStream& rng) const override;
  std::optional<double> symmetry_center() const override { return 0.0; }

 private:
  double nu_;
};

class GammaDist final : public Distribution {
 public:
  GammaDist(double shape, double scale);
  std::string name() const override;
  double pdf(double x) const override;
  double cdf(double x) const override;
  double quantile(double p) const override;
  double draw(RngStream& rng) const override;
  double support_lower() const override { return 0.0; }

 private:
  double shape_, scale_;
};

class ExponentialDist final : public Distribution {
 public:
  explicit ExponentialDist(double scale);  // mean = scale
  std::string name() const override;
  double pdf(double x) const override;
  double pdf_deriv(double x) const override;
  double cdf(double x) const override;
  double quantile(double p) const override;
  double draw(RngStream& rng) const override;
  double support_lower() const override { return 0.0; }

 private:
  double scale_;
};

class UniformDist final : public Distribution {
 public:
  UniformDist() = default;
  std::string name() const override { return "uniform"; }
  double pdf(double x) const override;
  double pdf_deriv(double) const override { return 0.0; }
  double cdf(double x) const override;
  double quantile(double p) const override;
  double draw(RngStream& rng) const override;
  double support_lower() const override { return 0.0; }
  double support_upper() const override { return 1.0; }
  bool flat_density() const override { return true; }
};

// Factory for the benchmark tokens: normal, t5, gamma3, exponential, uniform.
std::unique_ptr<Distribution> make_distribution(const std::string& token);

// Shortest interval with content 1-alpha for a unimodal density: minimizes
// quantile(1-alpha+delta) - quantile(delta) over the lower tail mass
// delta in [0, alpha], by golden-section to 1e-10 with finite-support endpoint
// checks.  Symmetric densities use delta = alpha/2 directly.  Throws for flat
// densities (no unique minimizer).
IntervalEstimate true_hpd(const Distribution& dist, double alpha);

// Independent oracle for the same quantity: staged dense grid search over
// delta.  Used to cross-check true_hpd; agreement expected to ~1e-6.
IntervalEstimate true_hpd_grid(const Distribution& dist, double alpha);

SortedSample sample_iid(const Distribution& dist, int n, RngStream& rng);
SortedSample sample_iid(const Distribution& dist, int n, std::uint64_t seed);

// Two-variable Gibbs sampler for a standard bivariate normal with correlation
// rho: alternates x | y ~ N(rho*y, 1-rho^2) and y | x ~ N(rho*x, 1-rho^2).
// Records the first coordinate every `thin` full sweeps after a 100-sweep
// burn-in; returns n_keep sorted draws whose marginal is N(0,1).
SortedSample gibbs_bivariate_normal(int n_keep, int thin, double rho, std::uint64_t seed);

}  // namespace spin

#endif
