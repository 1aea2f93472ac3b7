#include "spin/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spin/rng.hpp"

namespace spin {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
}

}  // namespace

int shortest_window_count(int n, double alpha) {
  check_alpha(alpha);
  const int k = static_cast<int>(std::ceil((1.0 - alpha) * n - 1e-9));
  return std::clamp(k, 1, n);
}

double empirical_quantile(const SortedSample& sample, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level must lie in (0,1)");
  const int n = sample.n();
  if (n == 1) return sample.at(1);
  const double pos = std::clamp(p * (n + 1), 1.0, static_cast<double>(n));
  const int i = std::min(static_cast<int>(pos), n - 1);
  const double frac = pos - i;
  return sample.at(i) + frac * (sample.at(i + 1) - sample.at(i));
}

std::pair<IntervalEstimate, ShortestWindow> empirical_shortest(const SortedSample& sample,
                                                               double alpha) {
  check_alpha(alpha);
  const int n = sample.n();
  const int k = shortest_window_count(n, alpha);
  if (k < 2) throw std::invalid_argument("window of ceil((1-alpha)*n) draws must cover >= 2 points");

  int best_j = 1;
  double best_len = sample.at(k) - sample.at(1);
  for (int j = 2; j + k - 1 <= n; ++j) {
    const double len = sample.at(j + k - 1) - sample.at(j);
    if (len < best_len) {  // strict: ties keep the smallest lower index
      best_len = len;
      best_j = j;
    }
  }

  ShortestWindow win{best_j, best_j + k - 1, k};
  IntervalEstimate est;
  est.lower = sample.at(win.lower_index);
  est.upper = sample.at(win.upper_index);
  est.alpha = alpha;
  est.method = Method::EmpiricalShortest;
  return {est, win};
}

IntervalEstimate empirical_central(const SortedSample& sample, double alpha) {
  check_alpha(alpha);
  IntervalEstimate est;
  est.lower = empirical_quantile(sample, alpha / 2.0);
  est.upper = empirical_quantile(sample, 1.0 - alpha / 2.0);
  est.alpha = alpha;
  est.method = Method::EmpiricalCentral;
  return est;
}

IntervalEstimate gaussian_fit_interval(const SortedSample& sample, double alpha) {
  check_alpha(alpha);
  const int n = sample.n();
  if (n < 2) throw std::invalid_argument("gaussian fit requires at least 2 draws");

  double mean = 0.0;
  for (double v : sample.values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : sample.values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));

  IntervalEstimate est;
  est.alpha = alpha;
  est.method = Method::GaussianFit;
  if (sd == 0.0) {
    est.lower = est.upper = mean;
    est.degenerate = true;
    return est;
  }
  const double z = normal_quantile(1.0 - alpha / 2.0);
  est.lower = mean - z * sd;
  est.upper = mean + z * sd;
  return est;
}

}  // namespace spin
