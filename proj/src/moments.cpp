#include "spin/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spin/empirical.hpp"

namespace spin {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kKernelCutoff = 8.0;  // kernel support in bandwidths

}  // namespace

KdeDensity::KdeDensity(const SortedSample& sample) : data_(sample.values) {
  const int n = sample.n();
  if (n < 2) throw std::invalid_argument("density estimate requires at least 2 draws");

  double mean = 0.0;
  for (double v : data_) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : data_) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  if (sd == 0.0) throw std::invalid_argument("zero-variance sample: density estimate undefined");

  const double iqr = empirical_quantile(sample, 0.75) - empirical_quantile(sample, 0.25);
  const double spread = (iqr > 0.0) ? std::min(sd, iqr / 1.34) : sd;
  h_ = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

void KdeDensity::density_pair(double x, double& f, double& fprime) const {
  const double lo = x - kKernelCutoff * h_;
  const double hi = x + kKernelCutoff * h_;
  auto first = std::lower_bound(data_.begin(), data_.end(), lo);
  auto last = std::upper_bound(first, data_.end(), hi);
  double u = 0.0, v = 0.0;
  for (auto it = first; it != last; ++it) {
    const double z = (x - *it) / h_;
    const double k = kInvSqrt2Pi * std::exp(-0.5 * z * z);
    u += k;
    v += z * k;
  }
  const double n = static_cast<double>(data_.size());
  f = u / (n * h_);
  fprime = -v / (n * h_ * h_);
}

double KdeDensity::density(double x) const {
  double f, fp;
  density_pair(x, f, fp);
  return f;
}

double KdeDensity::density_deriv(double x) const {
  double f, fp;
  density_pair(x, f, fp);
  return fp;
}

double kde_density_at(const SortedSample& sample, double x) {
  return KdeDensity(sample).density(x);
}

double MomentEstimates::mean(int i) const {
  const int k = i - window_lo;
  if (k < 0 || i > window_hi) throw std::out_of_range("moment index outside window");
  return Q[k] + p[k] * q[k] / (2.0 * (n + 2)) * Qpp[k];
}

double MomentEstimates::variance(int i) const {
  const int k = i - window_lo;
  if (k < 0 || i > window_hi) throw std::out_of_range("moment index outside window");
  return p[k] * q[k] / (n + 2) * Qp[k] * Qp[k];
}

double MomentEstimates::covariance(int i, int j) const {
  if (i > j) std::swap(i, j);
  const int a = i - window_lo, b = j - window_lo;
  if (a < 0 || j > window_hi) throw std::out_of_range("moment index outside window");
  return p[a] * q[b] / (n + 2) * Qp[a] * Qp[b];
}

MomentEstimates order_stat_moments(const SortedSample& sample, int window_lo, int window_hi,
                                   const DensityModel& model, QppMode mode) {
  const int n = sample.n();
  if (window_lo < 1 || window_hi > n || window_lo > window_hi)
    throw std::invalid_argument("moment window must lie within [1, n]");
  const double range = sample.max() - sample.min();
  if (range <= 0.0) throw std::invalid_argument("zero-range sample: moments undefined");
  const double floor = 1e-4 / range;

  MomentEstimates m;
  m.window_lo = window_lo;
  m.window_hi = window_hi;
  m.n = n;
  const int size = window_hi - window_lo + 1;
  m.p.resize(size);
  m.q.resize(size);
  m.Q.resize(size);
  m.Qp.resize(size);
  m.Qpp.resize(size);

  for (int k = 0; k < size; ++k) {
    const int i = window_lo + k;
    m.p[k] = static_cast<double>(i) / (n + 1);
    m.q[k] = 1.0 - m.p[k];
    m.Q[k] = sample.at(i);
    double f, fp;
    model.density_pair(m.Q[k], f, fp);
    if (f < floor) {
      f = floor;
      ++m.clamped_count;
    }
    m.Qp[k] = 1.0 / f;
    m.Qpp[k] = (mode == QppMode::Standard) ? -fp / (f * f * f) : m.Q[k] / (f * f);
  }
  return m;
}

}  // namespace spin
