#include "spin/samples.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spin {

namespace {

void check_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument("sample contains a non-finite value");
}

}  // namespace

double SortedSample::at(int i) const {
  if (i < 1 || i > n()) throw std::out_of_range("order-statistic index out of range");
  return values[static_cast<std::size_t>(i - 1)];
}

SortedSample SortedSample::from_raw(std::vector<double> raw) {
  if (raw.empty()) throw std::invalid_argument("sample is empty");
  check_finite(raw);
  std::sort(raw.begin(), raw.end());
  SortedSample s;
  s.values = std::move(raw);
  return s;
}

SortedSample SortedSample::from_sorted(std::vector<double> asc) {
  if (asc.empty()) throw std::invalid_argument("sample is empty");
  check_finite(asc);
  if (!std::is_sorted(asc.begin(), asc.end()))
    throw std::invalid_argument("values are not in ascending order");
  SortedSample s;
  s.values = std::move(asc);
  return s;
}

SortedSample sort_sample(const std::vector<double>& raw) { return SortedSample::from_raw(raw); }

const char* method_token(Method m) {
  switch (m) {
    case Method::EmpiricalShortest: return "shortest";
    case Method::EmpiricalCentral: return "central";
    case Method::Spin: return "spin";
    case Method::CentralQp: return "central-qp";
    case Method::GaussianFit: return "gaussian";
    case Method::TrueHpd: return "true-hpd";
  }
  return "unknown";
}

bool WeightKernel::is_valid(std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  const int m = window_hi - window_lo + 1;
  if (window_lo < 1 || window_hi < window_lo) return fail("window bounds are inverted or below 1");
  if (center_index < window_lo || center_index > window_hi)
    return fail("center index lies outside the window");
  if (static_cast<int>(weights.size()) != m) return fail("weight count does not match window size");

  double sum = 0.0, wmax = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) return fail("non-finite weight");
    if (w < -1e-10) return fail("weight below -1e-10");
    sum += w;
    wmax = std::max(wmax, std::fabs(w));
  }
  if (std::fabs(sum - 1.0) > 1e-10) return fail("weights do not sum to 1 within 1e-10");

  // Unimodality: non-decreasing up to the center, non-increasing after.
  const int c = center_index - window_lo;
  const double tol = 1e-9 * (1.0 + wmax);
  for (int i = 0; i < c; ++i)
    if (weights[i] > weights[i + 1] + tol)
      return fail("weights decrease before the center (w[" + std::to_string(i) +
                  "]=" + std::to_string(weights[i]) + " > w[" + std::to_string(i + 1) +
                  "]=" + std::to_string(weights[i + 1]) + ", center offset " +
                  std::to_string(c) + ")");
  for (int i = c; i + 1 < m; ++i)
    if (weights[i + 1] > weights[i] + tol)
      return fail("weights increase after the center (w[" + std::to_string(i + 1) +
                  "]=" + std::to_string(weights[i + 1]) + " > w[" + std::to_string(i) +
                  "]=" + std::to_string(weights[i]) + ", center offset " + std::to_string(c) +
                  ")");
  return true;
}

void WeightKernel::validate() const {
  std::string why;
  if (!is_valid(&why)) throw std::invalid_argument("invalid weight kernel: " + why);
}

double weighted_endpoint(const SortedSample& sample, const WeightKernel& kernel) {
  if (kernel.window_lo < 1 || kernel.window_hi > sample.n())
    throw std::out_of_range("kernel window exceeds the sample");
  if (static_cast<int>(kernel.weights.size()) != kernel.window_hi - kernel.window_lo + 1)
    throw std::invalid_argument("weight count does not match window size");
  double acc = 0.0;
  for (int i = kernel.window_lo; i <= kernel.window_hi; ++i)
    acc += kernel.weights[static_cast<std::size_t>(i - kernel.window_lo)] * sample.at(i);
  return acc;
}

double weighted_endpoint(const SortedSample& sample, const std::vector<double>& weights) {
  if (static_cast<int>(weights.size()) != sample.n())
    throw std::invalid_argument("dense weight vector length does not match sample size");
  double acc = 0.0;
  for (int i = 0; i < sample.n(); ++i) acc += weights[static_cast<std::size_t>(i)] * sample.values[static_cast<std::size_t>(i)];
  return acc;
}

}  // namespace spin
