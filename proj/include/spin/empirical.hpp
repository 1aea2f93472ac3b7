#ifndef SPIN_EMPIRICAL_HPP_
#define SPIN_EMPIRICAL_HPP_

#include <utility>

#include "spin/samples.hpp"

namespace spin {

// Contiguous block of order statistics realizing the empirical shortest interval.
struct ShortestWindow {
  int lower_index = 0;   // 1-based order-statistic index of the lower endpoint
  int upper_index = 0;
  int window_count = 0;  // upper_index - lower_index + 1
};

// Number of order statistics an interval with miss probability alpha must
// cover: ceil((1-alpha)*n), with a 1e-9 guard against products like 0.8*5
// landing a hair above their exact value.
int shortest_window_count(int n, double alpha);

// Linear interpolation of the order statistics at position p*(n+1), clipped
// to [1, n].  This matches E U_(i) = i/(n+1), the convention the
// order-statistic moment formulas are built on.
double empirical_quantile(const SortedSample& sample, double p);

// Shortest contiguous window of ceil((1-alpha)*n) sorted draws.  Ties on the
// window length resolve to the smallest lower index.
std::pair<IntervalEstimate, ShortestWindow> empirical_shortest(const SortedSample& sample,
                                                               double alpha);

// (quantile(alpha/2), quantile(1-alpha/2)) under empirical_quantile's rule.
IntervalEstimate empirical_central(const SortedSample& sample, double alpha);

// mean +/- z_{1-alpha/2} * sd.  A zero-variance sample yields a point interval
// with the degenerate flag set.
IntervalEstimate gaussian_fit_interval(const SortedSample& sample, double alpha);

}  // namespace spin

#endif
