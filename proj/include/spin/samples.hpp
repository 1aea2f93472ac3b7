#ifndef SPIN_SAMPLES_HPP_
#define SPIN_SAMPLES_HPP_

#include <optional>
#include <string>
#include <vector>

namespace spin {

// Ascending Monte Carlo draws; the universal input for every interval method.
// Treat as immutable after construction — all downstream code shares by const ref.
struct SortedSample {
  std::vector<double> values;             // non-decreasing, all finite
  std::optional<double> augmented_lower;  // boundary pseudo-datapoint, if inserted
  std::optional<double> augmented_upper;

  int n() const { return static_cast<int>(values.size()); }
  // 1-based order statistic X_(i).
  double at(int i) const;
  double min() const { return values.front(); }
  double max() const { return values.back(); }

  static SortedSample from_raw(std::vector<double> raw);     // sorts a copy
  static SortedSample from_sorted(std::vector<double> asc);  // validates order
};

enum class Method {
  EmpiricalShortest,
  EmpiricalCentral,
  Spin,
  CentralQp,
  GaussianFit,
  TrueHpd,
};

// Stable lowercase token used by the CLI, CSV output, and JSON.
const char* method_token(Method m);

struct IntervalEstimate {
  double lower = 0.0;
  double upper = 0.0;
  double alpha = 0.0;  // nominal miss probability; interval targets 1-alpha content
  Method method = Method::EmpiricalShortest;
  bool degenerate = false;  // zero-variance sample forced a point interval
};

// Per-order-statistic weights for one interval endpoint.  Window bounds are
// 1-based order-statistic positions, inclusive.
struct WeightKernel {
  int center_index = 0;
  int window_lo = 0;
  int window_hi = 0;
  std::vector<double> weights;  // size window_hi - window_lo + 1
  int bandwidth_b = 0;

  // Checks: weights sum to 1 (1e-10), none below -1e-10, unimodal with the
  // peak at center_index.
  bool is_valid(std::string* why = nullptr) const;
  void validate() const;  // throws std::invalid_argument with the reason
};

SortedSample sort_sample(const std::vector<double>& raw);

// Sum of w_i * X_(i) over the kernel window.
double weighted_endpoint(const SortedSample& sample, const WeightKernel& kernel);
// Same for a dense weight vector over positions 1..n.
double weighted_endpoint(const SortedSample& sample, const std::vector<double>& weights);

}  // namespace spin

#endif
