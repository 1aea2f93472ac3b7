#ifndef SPIN_BENCH_HPP_
#define SPIN_BENCH_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spin/samples.hpp"

namespace spin {

struct GibbsSpec {
  double rho = 0.9;
  int thin = 10;
};

// One point of the experimental grid: a distribution, a sample size, a nominal
// level, and the interval methods to replicate.
struct ExperimentCell {
  std::string dist;  // normal | t5 | gamma3 | exponential | gibbs
  int n = 500;       // n_keep when dist == "gibbs"
  double alpha = 0.05;
  int replications = 2000;
  std::vector<Method> methods;
  std::uint64_t seed = 1;
  std::optional<double> lower_bound;  // forwarded to the QP-weighted methods
  std::optional<double> upper_bound;
  GibbsSpec gibbs;
  int bootstrap_B = 50;

  std::string cell_id() const;  // e.g. "normal-n500-a0.05"
};

struct EndpointStats {
  double rmse = 0.0;
  double bias = 0.0;
  double variance = 0.0;  // rmse^2 = bias^2 + variance by construction
  double mc_stderr_rmse = 0.0;
};

struct MethodReport {
  Method method = Method::EmpiricalShortest;
  EndpointStats lower, upper;
  double coverage_mean = 0.0;  // mean of F(upper) - F(lower)
  double coverage_stderr = 0.0;
  // MSE(empirical shortest) / MSE(method), per endpoint and summed over both;
  // NaN when the cell did not run the empirical shortest baseline.
  double efficiency_lower = 0.0;
  double efficiency_upper = 0.0;
  double efficiency = 0.0;
  double efficiency_stderr = 0.0;
  int failures = 0;
};

// Aggregates for one cell.  Per-replicate endpoint errors are retained when
// run_cell is asked to keep them (raw auditing dump); per-replicate coverages
// are always retained for the coverage histograms.
struct ReplicationReport {
  ExperimentCell cell;
  double true_lower = 0.0;  // shortest-interval oracle endpoints
  double true_upper = 0.0;
  std::vector<MethodReport> methods;
  std::vector<std::vector<double>> coverage;      // [method][replicate], NaN on failure
  std::vector<std::vector<double>> errors_lower;  // kept only with keep_raw
  std::vector<std::vector<double>> errors_upper;
  bool has_raw = false;
};

// Runs every replication of a cell: draw, estimate with each method, record
// endpoint errors against the shortest-interval oracle and exact coverage.
// Replicates are distributed over `workers` threads with per-replicate seed
// substreams and aggregated in index order with compensated summation, so the
// report is byte-identical for any worker count.  Throws if any method fails
// in more than 1% of replicates.
ReplicationReport run_cell(const ExperimentCell& cell, int workers = 1, bool keep_raw = false);

// CSV emission, one row per (cell, method, endpoint in {lower, upper, both}).
// Columns: cell_id, dist, n, alpha, method, endpoint, rmse, bias, variance,
// coverage_mean, efficiency, mc_stderr_rmse, failures.  Numbers print with 17
// significant digits; inapplicable fields stay empty.
void emit_csv(const std::vector<ReplicationReport>& reports, std::ostream& os);

// Raw per-replicate error dump: cell_id, replicate, method, endpoint, error.
void emit_raw_csv(const ReplicationReport& report, std::ostream& os);

// Self-contained SVG charts into out_dir: efficiency-vs-n lines per
// (dist, alpha) group, stacked bias^2/variance bars and coverage histograms
// per cell.  Returns the file names written (empty input writes nothing).
std::vector<std::string> emit_plots(const std::vector<ReplicationReport>& reports,
                                    const std::string& out_dir);

}  // namespace spin

#endif
