#include "spin/distributions.hpp"

#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double Distribution::pdf_deriv(double x) const {
  const double h = 1e-6 * (1.0 + std::fabs(x));
  return (pdf(x + h) - pdf(x - h)) / (2.0 * h);
}

double Distribution::support_lower() const { return -kInf; }
double Distribution::support_upper() const { return kInf; }

// ---------------------------------------------------------------- normal

NormalDist::NormalDist(double mu, double sigma) : mu_(mu), sigma_(sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("normal: sigma must be positive");
}
std::string NormalDist::name() const { return "normal"; }
double NormalDist::pdf(double x) const {
  return boost::math::pdf(boost::math::normal_distribution<>(mu_, sigma_), x);
}
double NormalDist::pdf_deriv(double x) const {
  const double z = (x - mu_) / sigma_;
  return -z / sigma_ * pdf(x);
}
double NormalDist::cdf(double x) const {
  return boost::math::cdf(boost::math::normal_distribution<>(mu_, sigma_), x);
}
double NormalDist::quantile(double p) const {
  return boost::math::quantile(boost::math::normal_distribution<>(mu_, sigma_), p);
}
double NormalDist::draw(RngStream& rng) const { return mu_ + sigma_ * rng.normal(); }

// ---------------------------------------------------------------- student t

StudentTDist::StudentTDist(double nu) : nu_(nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("student t: nu must be positive");
}
std::string StudentTDist::name() const {
  return "t" + std::to_string(static_cast<int>(nu_));
}
double StudentTDist::pdf(double x) const {
  return boost::math::pdf(boost::math::students_t_distribution<>(nu_), x);
}
double StudentTDist::cdf(double x) const {
  return boost::math::cdf(boost::math::students_t_distribution<>(nu_), x);
}
double StudentTDist::quantile(double p) const {
  return boost::math::quantile(boost::math::students_t_distribution<>(nu_), p);
}
double StudentTDist::draw(RngStream& rng) const {
  // z / sqrt(chi2_nu / nu) with chi2_nu = Gamma(nu/2, scale 2).
  const double z = rng.normal();
  const double chi2 = 2.0 * rng.gamma(nu_ / 2.0);
  return z / std::sqrt(chi2 / nu_);
}

// ---------------------------------------------------------------- gamma

GammaDist::GammaDist(double shape, double scale) : shape_(shape), scale_(scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw std::invalid_argument("gamma: shape and scale must be positive");
}
std::string GammaDist::name() const {
  return "gamma" + std::to_string(static_cast<int>(shape_));
}
double GammaDist::pdf(double x) const {
  if (x < 0.0) return 0.0;
  return boost::math::pdf(boost::math::gamma_distribution<>(shape_, scale_), x);
}
double GammaDist::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return boost::math::cdf(boost::math::gamma_distribution<>(shape_, scale_), x);
}
double GammaDist::quantile(double p) const {
  return boost::math::quantile(boost::math::gamma_distribution<>(shape_, scale_), p);
}
double GammaDist::draw(RngStream& rng) const { return scale_ * rng.gamma(shape_); }

// ---------------------------------------------------------------- exponential

ExponentialDist::ExponentialDist(double scale) : scale_(scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("exponential: scale must be positive");
}
std::string ExponentialDist::name() const { return "exponential"; }
double ExponentialDist::pdf(double x) const {
  if (x < 0.0) return 0.0;
  return boost::math::pdf(boost::math::exponential_distribution<>(1.0 / scale_), x);
}
double ExponentialDist::pdf_deriv(double x) const {
  if (x < 0.0) return 0.0;
  return -pdf(x) / scale_;
}
double ExponentialDist::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return boost::math::cdf(boost::math::exponential_distribution<>(1.0 / scale_), x);
}
double ExponentialDist::quantile(double p) const {
  return boost::math::quantile(boost::math::exponential_distribution<>(1.0 / scale_), p);
}
double ExponentialDist::draw(RngStream& rng) const { return scale_ * rng.exponential(); }

// ---------------------------------------------------------------- uniform

double UniformDist::pdf(double x) const { return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0; }
double UniformDist::cdf(double x) const { return std::clamp(x, 0.0, 1.0); }
double UniformDist::quantile(double p) const {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("uniform: p out of [0,1]");
  return p;
}
double UniformDist::draw(RngStream& rng) const { return rng.uniform_open(); }

// ---------------------------------------------------------------- factory

std::unique_ptr<Distribution> make_distribution(const std::string& token) {
  if (token == "normal") return std::make_unique<NormalDist>(0.0, 1.0);
  if (token == "t5") return std::make_unique<StudentTDist>(5.0);
  if (token == "gamma3") return std::make_unique<GammaDist>(3.0, 1.0);
  if (token == "exponential") return std::make_unique<ExponentialDist>(1.0);
  if (token == "uniform") return std::make_unique<UniformDist>();
  throw std::invalid_argument("unknown distribution token: " + token);
}

// ---------------------------------------------------------------- shortest interval

namespace {

// Interval length when delta of the miss mass alpha sits below the interval.
// Finite-support endpoints use the support bound instead of an extreme quantile.
double interval_length(const Distribution& dist, double alpha, double delta) {
  const double lo = (delta <= 0.0) ? dist.support_lower() : dist.quantile(delta);
  const double hp = 1.0 - alpha + delta;
  const double hi = (hp >= 1.0) ? dist.support_upper() : dist.quantile(hp);
  return hi - lo;
}

IntervalEstimate hpd_from_delta(const Distribution& dist, double alpha, double delta) {
  IntervalEstimate est;
  est.lower = (delta <= 0.0) ? dist.support_lower() : dist.quantile(delta);
  const double hp = 1.0 - alpha + delta;
  est.upper = (hp >= 1.0) ? dist.support_upper() : dist.quantile(hp);
  est.alpha = alpha;
  est.method = Method::TrueHpd;
  return est;
}

void check_hpd_args(const Distribution& dist, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (dist.flat_density())
    throw std::invalid_argument("shortest interval is not unique for a flat density");
}

}  // namespace

IntervalEstimate true_hpd(const Distribution& dist, double alpha) {
  check_hpd_args(dist, alpha);
  if (dist.symmetry_center()) return hpd_from_delta(dist, alpha, alpha / 2.0);

  const bool lower_finite = std::isfinite(dist.support_lower());
  const bool upper_finite = std::isfinite(dist.support_upper());
  double a = lower_finite ? 0.0 : alpha * 1e-12;
  double b = upper_finite ? alpha : alpha * (1.0 - 1e-12);

  // Golden-section on the (unimodal) length as a function of delta.
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = interval_length(dist, alpha, x1);
  double f2 = interval_length(dist, alpha, x2);
  while (b - a > 1e-10) {
    if (f1 <= f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = interval_length(dist, alpha, x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = interval_length(dist, alpha, x2);
    }
  }
  double best = 0.5 * (a + b);
  double best_len = interval_length(dist, alpha, best);

  // The minimum may sit exactly at a finite-support endpoint (monotone densities).
  if (lower_finite && interval_length(dist, alpha, 0.0) <= best_len) {
    best = 0.0;
    best_len = interval_length(dist, alpha, 0.0);
  }
  if (upper_finite && interval_length(dist, alpha, alpha) < best_len) best = alpha;

  return hpd_from_delta(dist, alpha, best);
}

IntervalEstimate true_hpd_grid(const Distribution& dist, double alpha) {
  check_hpd_args(dist, alpha);
  const bool lower_finite = std::isfinite(dist.support_lower());
  const bool upper_finite = std::isfinite(dist.support_upper());
  double lo = lower_finite ? 0.0 : alpha * 1e-9;
  double hi = upper_finite ? alpha : alpha * (1.0 - 1e-9);

  const int kPoints = 6001;
  double best = lo;
  for (int stage = 0; stage < 3; ++stage) {
    const double step = (hi - lo) / (kPoints - 1);
    double best_len = kInf;
    int best_i = 0;
    for (int i = 0; i < kPoints; ++i) {
      const double d = lo + step * i;
      const double len = interval_length(dist, alpha, d);
      if (len < best_len) {
        best_len = len;
        best_i = i;
      }
    }
    best = lo + step * best_i;
    const double new_lo = std::max(lo, best - 2.0 * step);
    const double new_hi = std::min(hi, best + 2.0 * step);
    lo = new_lo;
    hi = new_hi;
  }
  // Snap to an exact support endpoint when the search landed on the first/last cell.
  if (lower_finite && best <= alpha * 1e-8) best = 0.0;
  if (upper_finite && best >= alpha * (1.0 - 1e-8)) best = alpha;
  return hpd_from_delta(dist, alpha, best);
}

// ---------------------------------------------------------------- samplers

SortedSample sample_iid(const Distribution& dist, int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sample size must be positive");
  std::vector<double> draws(static_cast<std::size_t>(n));
  for (double& x : draws) x = dist.draw(rng);
  return SortedSample::from_raw(std::move(draws));
}

SortedSample sample_iid(const Distribution& dist, int n, std::uint64_t seed) {
  RngStream rng(seed);
  return sample_iid(dist, n, rng);
}

SortedSample gibbs_bivariate_normal(int n_keep, int thin, double rho, std::uint64_t seed) {
  if (n_keep < 1) throw std::invalid_argument("gibbs: n_keep must be positive");
  if (thin < 1) throw std::invalid_argument("gibbs: thin must be >= 1");
  if (!(std::fabs(rho) < 1.0)) throw std::invalid_argument("gibbs: |rho| must be < 1");

  RngStream rng(seed);
  const double s = std::sqrt(1.0 - rho * rho);
  double x = 0.0, y = 0.0;
  auto sweep = [&] {
    x = rho * y + s * rng.normal();
    y = rho * x + s * rng.normal();
  };
  for (int i = 0; i < 100; ++i) sweep();  // burn-in

  std::vector<double> kept;
  kept.reserve(static_cast<std::size_t>(n_keep));
  while (static_cast<int>(kept.size()) < n_keep) {
    for (int t = 0; t < thin; ++t) sweep();
    kept.push_back(x);
  }
  return SortedSample::from_raw(std::move(kept));
}

}  // namespace spin
