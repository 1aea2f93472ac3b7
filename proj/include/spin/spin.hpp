#ifndef SPIN_SPIN_HPP_
#define SPIN_SPIN_HPP_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "spin/qp.hpp"
#include "spin/samples.hpp"

namespace spin {

struct SpinConfig {
  double alpha = 0.05;
  int bootstrap_B = 50;
  // QP window covers bandwidth_b + 1 order statistics; must be even and >= 2.
  // 0 selects default_bandwidth(n) = sqrt(n) rounded to an even integer.
  int bandwidth_b = 0;
  // Known support bounds; when set, a pseudo-datapoint is inserted at each
  // bound before everything else so the interval can reach the boundary.
  std::optional<double> lower_bound;
  std::optional<double> upper_bound;
  std::uint64_t seed = 1;
  // Compatibility switches for the alternative estimator forms:
  //  - bias_corrected_matrix=false builds the quadratic coefficients from the
  //    plain quantile plug-in instead of the second-order-corrected means;
  //  - curvature_ratio_qpp=true uses Q/f(Q)^2 for Q'' instead of -f'/f^3.
  bool bias_corrected_matrix = true;
  bool curvature_ratio_qpp = false;
  // Test hook: every "resample" is the original sample (disables the bootstrap).
  bool bootstrap_identity = false;
};

struct ObjectiveSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct SpinDiagnostics {
  int bandwidth_b = 0;           // bandwidth actually used
  int dropped_replicates = 0;    // bootstrap replicates whose QP failed
  int clamped_density_count = 0; // density-floor activations across replicates
  bool clipped_window_lower = false;
  bool clipped_window_upper = false;
  ObjectiveSummary lower_objective;  // per-replicate QP objectives
  ObjectiveSummary upper_objective;
};

struct SpinResult {
  IntervalEstimate interval;
  // Bootstrap-averaged weights over order-statistic positions 1..n of the
  // (augmented) sample; each sums to 1.
  std::vector<double> lower_kernel;
  std::vector<double> upper_kernel;
  SpinDiagnostics diagnostics;
};

// sqrt(n) rounded to the nearest even integer (window halves must be integral).
int default_bandwidth(int n);

// Inserts pseudo-datapoints at the given support bounds.  Bounds must bracket
// the draws; each insertion grows n by one and records provenance.
SortedSample augment_bounds(const SortedSample& sample, std::optional<double> lower,
                            std::optional<double> upper);

// The full estimator: B bootstrap resamples -> per-endpoint QP weights around
// the resample's empirical-shortest endpoints -> positionwise weight average
// -> weighted order statistics of the original (augmented) sample.
SpinResult spin_interval(const SortedSample& sample, const SpinConfig& config);

// Same pipeline with windows centered on the empirical central interval's
// endpoint positions and targets at the alpha/2 and 1-alpha/2 quantiles.
SpinResult central_qp_interval(const SortedSample& sample, const SpinConfig& config);

// Diagnostic hook behind the CLI debug flag: poses the two endpoint QPs on
// the augmented sample itself (no bootstrap resampling) and solves them.
// Returns {lower, upper} as (problem, solution) pairs; `method` must be
// Spin or CentralQp.
std::vector<std::pair<QpProblem, QpSolution>> debug_endpoint_problems(
    const SortedSample& sample, const SpinConfig& config, Method method);

}  // namespace spin

#endif
