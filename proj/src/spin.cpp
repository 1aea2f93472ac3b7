#include "spin/spin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "spin/empirical.hpp"
#include "spin/moments.hpp"
#include "spin/qp.hpp"
#include "spin/rng.hpp"

namespace spin {

namespace {

struct EndpointPlan {
  int center = 0;
  double target = 0.0;
};

// One endpoint QP, posed and solved.
struct PosedEndpoint {
  QpProblem problem;
  QpSolution solution;
  int clamped = 0;
  bool clipped = false;
};

PosedEndpoint pose_endpoint(const SortedSample& resample, const KdeDensity& kde,
                            const EndpointPlan& plan, int b, const SpinConfig& config) {
  const int n = resample.n();
  const int lo = std::max(1, plan.center - b / 2);
  const int hi = std::min(n, plan.center + b / 2);
  PosedEndpoint posed;
  posed.clipped = (lo > plan.center - b / 2) || (hi < plan.center + b / 2);

  const QppMode mode = config.curvature_ratio_qpp ? QppMode::Ratio : QppMode::Standard;
  const MomentEstimates moments = order_stat_moments(resample, lo, hi, kde, mode);
  posed.clamped = moments.clamped_count;

  posed.problem = build_problem(moments, plan.center, b, plan.target, resample,
                                config.bias_corrected_matrix);
  posed.solution = solve(posed.problem);
  return posed;
}

// Per-replicate QP around one endpoint; returns the staged kernel.
struct EndpointFit {
  WeightKernel kernel;
  double objective = 0.0;
  int clamped = 0;
  bool clipped = false;
};

EndpointFit fit_endpoint(const SortedSample& resample, const KdeDensity& kde,
                         const EndpointPlan& plan, int b, const SpinConfig& config) {
  const PosedEndpoint posed = pose_endpoint(resample, kde, plan, b, config);
  EndpointFit fit;
  fit.clipped = posed.clipped;
  fit.clamped = posed.clamped;
  fit.objective = posed.solution.objective;

  fit.kernel.center_index = plan.center;
  fit.kernel.window_lo = posed.problem.window_lo;
  fit.kernel.window_hi = posed.problem.window_hi;
  fit.kernel.bandwidth_b = b;
  fit.kernel.weights.assign(posed.solution.weights.data(),
                            posed.solution.weights.data() + posed.solution.weights.size());

  // Weights attached to tied order statistics (common in bootstrap
  // resamples) act on the estimate only through their run sum, and the
  // constraint rows separate them only at jitter scale, so how the solver
  // splits a run is numerical noise that can leave per-index wiggle above
  // the validation tolerance. Average each run: the canonical unimodal
  // representative with an identical estimate.
  const int m = static_cast<int>(fit.kernel.weights.size());
  for (int k = 0; k < m;) {
    int j = k + 1;
    while (j < m && resample.at(posed.problem.window_lo + j) ==
                        resample.at(posed.problem.window_lo + k))
      ++j;
    if (j - k > 1) {
      double sum = 0.0;
      for (int t = k; t < j; ++t) sum += fit.kernel.weights[static_cast<std::size_t>(t)];
      const double avg = sum / (j - k);
      for (int t = k; t < j; ++t) fit.kernel.weights[static_cast<std::size_t>(t)] = avg;
    }
    k = j;
  }

  std::string why;
  if (!fit.kernel.is_valid(&why)) throw QpFailure("solved weights failed validation: " + why);
  return fit;
}

// Size-n resample with replacement via counting sort over the sorted source.
// Pseudo-datapoints at the support bounds are re-inserted deterministically so
// the boundary stays reachable in every replicate: n - k indices are drawn
// i.i.d. from all n positions, then the k bound positions are appended.
SortedSample bootstrap_resample(const SortedSample& aug, RngStream& rng) {
  const int n = aug.n();
  const int k = (aug.augmented_lower ? 1 : 0) + (aug.augmented_upper ? 1 : 0);
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (int t = 0; t < n - k; ++t)
    ++counts[static_cast<std::size_t>(rng.uniform_below(static_cast<std::uint64_t>(n)))];
  if (aug.augmented_lower) ++counts.front();
  if (aug.augmented_upper) ++counts.back();

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < counts[static_cast<std::size_t>(i)]; ++c)
      values.push_back(aug.values[static_cast<std::size_t>(i)]);

  SortedSample out = SortedSample::from_sorted(std::move(values));
  out.augmented_lower = aug.augmented_lower;
  out.augmented_upper = aug.augmented_upper;
  return out;
}

void validate_config(const SortedSample& sample, const SpinConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0,1)");
  if (config.bootstrap_B < 1) throw std::invalid_argument("bootstrap_B must be >= 1");
  if (sample.n() < 10)
    throw std::invalid_argument("QP-weighted intervals require at least 10 draws");
  if (config.bandwidth_b != 0 && (config.bandwidth_b < 2 || config.bandwidth_b % 2 != 0))
    throw std::invalid_argument("bandwidth must be an even integer >= 2 (or 0 for automatic)");
}

std::pair<EndpointPlan, EndpointPlan> plan_spin(const SortedSample& resample, double alpha) {
  const auto [ivl, win] = empirical_shortest(resample, alpha);
  return {{win.lower_index, ivl.lower}, {win.upper_index, ivl.upper}};
}

std::pair<EndpointPlan, EndpointPlan> plan_central(const SortedSample& resample, double alpha) {
  const int n = resample.n();
  const IntervalEstimate central = empirical_central(resample, alpha);
  auto center_at = [&](double p) {
    const auto i = static_cast<int>(std::llround(p * (n + 1)));
    return std::clamp(i, 1, n);
  };
  return {{center_at(alpha / 2.0), central.lower},
          {center_at(1.0 - alpha / 2.0), central.upper}};
}

ObjectiveSummary summarize(const std::vector<double>& v) {
  ObjectiveSummary s;
  if (v.empty()) return s;
  s.min = s.max = v.front();
  double acc = 0.0;
  for (double x : v) {
    acc += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = acc / static_cast<double>(v.size());
  return s;
}

// Shared bootstrap-average loop; `plan` maps a resample to the two endpoint
// centers/targets for the method at hand.
template <typename PlanFn>
SpinResult run_weighted(const SortedSample& sample, const SpinConfig& config, Method method,
                        PlanFn plan_endpoints) {
  validate_config(sample, config);
  const SortedSample aug = augment_bounds(sample, config.lower_bound, config.upper_bound);
  const int n = aug.n();
  const int b = (config.bandwidth_b != 0) ? config.bandwidth_b : default_bandwidth(n);

  SpinResult res;
  res.diagnostics.bandwidth_b = b;
  std::vector<double> lower_acc(static_cast<std::size_t>(n), 0.0);
  std::vector<double> upper_acc(static_cast<std::size_t>(n), 0.0);
  std::vector<double> lower_objs, upper_objs;
  lower_objs.reserve(static_cast<std::size_t>(config.bootstrap_B));
  upper_objs.reserve(static_cast<std::size_t>(config.bootstrap_B));

  RngStream root(config.seed);
  int successes = 0;
  std::string last_failure;
  for (int r = 0; r < config.bootstrap_B; ++r) {
    RngStream sub = root.substream(static_cast<std::uint64_t>(r));
    const SortedSample resample =
        config.bootstrap_identity ? aug : bootstrap_resample(aug, sub);
    if (resample.min() == resample.max()) {  // degenerate resample: no density estimate
      ++res.diagnostics.dropped_replicates;
      continue;
    }
    try {
      const KdeDensity kde(resample);
      const auto [lower_plan, upper_plan] = plan_endpoints(resample);
      const EndpointFit flo = fit_endpoint(resample, kde, lower_plan, b, config);
      const EndpointFit fhi = fit_endpoint(resample, kde, upper_plan, b, config);

      for (int i = flo.kernel.window_lo; i <= flo.kernel.window_hi; ++i)
        lower_acc[static_cast<std::size_t>(i - 1)] +=
            flo.kernel.weights[static_cast<std::size_t>(i - flo.kernel.window_lo)];
      for (int i = fhi.kernel.window_lo; i <= fhi.kernel.window_hi; ++i)
        upper_acc[static_cast<std::size_t>(i - 1)] +=
            fhi.kernel.weights[static_cast<std::size_t>(i - fhi.kernel.window_lo)];
      lower_objs.push_back(flo.objective);
      upper_objs.push_back(fhi.objective);
      res.diagnostics.clamped_density_count += flo.clamped + fhi.clamped;
      res.diagnostics.clipped_window_lower |= flo.clipped;
      res.diagnostics.clipped_window_upper |= fhi.clipped;
      ++successes;
    } catch (const QpFailure& e) {
      ++res.diagnostics.dropped_replicates;
      last_failure = e.what();
    }
  }

  if (2 * res.diagnostics.dropped_replicates > config.bootstrap_B)
    throw std::runtime_error("more than half of the bootstrap replicates failed (" +
                             std::to_string(res.diagnostics.dropped_replicates) + " of " +
                             std::to_string(config.bootstrap_B) + "); last failure: " +
                             last_failure);
  if (successes == 0) throw std::runtime_error("no bootstrap replicate produced weights");

  auto finalize = [&](std::vector<double>& acc) {
    double sum = 0.0;
    for (double& w : acc) {
      w /= static_cast<double>(successes);
      sum += w;
    }
    for (double& w : acc) w /= sum;  // clipped windows can nudge the total off 1
  };
  finalize(lower_acc);
  finalize(upper_acc);

  res.interval.lower = weighted_endpoint(aug, lower_acc);
  res.interval.upper = weighted_endpoint(aug, upper_acc);
  res.interval.alpha = config.alpha;
  res.interval.method = method;
  if (res.interval.lower > res.interval.upper)
    throw std::runtime_error("averaged endpoints crossed; estimate is unusable");
  res.lower_kernel = std::move(lower_acc);
  res.upper_kernel = std::move(upper_acc);
  res.diagnostics.lower_objective = summarize(lower_objs);
  res.diagnostics.upper_objective = summarize(upper_objs);
  return res;
}

}  // namespace

int default_bandwidth(int n) {
  if (n < 1) throw std::invalid_argument("sample size must be positive");
  const int b = 2 * static_cast<int>(std::llround(std::sqrt(static_cast<double>(n)) / 2.0));
  return std::max(b, 2);
}

SortedSample augment_bounds(const SortedSample& sample, std::optional<double> lower,
                            std::optional<double> upper) {
  if (!lower && !upper) return sample;
  if (lower && !(std::isfinite(*lower) && *lower <= sample.min()))
    throw std::invalid_argument("lower bound must be finite and <= the smallest draw");
  if (upper && !(std::isfinite(*upper) && *upper >= sample.max()))
    throw std::invalid_argument("upper bound must be finite and >= the largest draw");

  std::vector<double> values;
  values.reserve(sample.values.size() + 2);
  if (lower) values.push_back(*lower);
  values.insert(values.end(), sample.values.begin(), sample.values.end());
  if (upper) values.push_back(*upper);

  SortedSample out = SortedSample::from_sorted(std::move(values));
  out.augmented_lower = lower;
  out.augmented_upper = upper;
  return out;
}

SpinResult spin_interval(const SortedSample& sample, const SpinConfig& config) {
  return run_weighted(sample, config, Method::Spin, [&](const SortedSample& resample) {
    return plan_spin(resample, config.alpha);
  });
}

SpinResult central_qp_interval(const SortedSample& sample, const SpinConfig& config) {
  return run_weighted(sample, config, Method::CentralQp, [&](const SortedSample& resample) {
    return plan_central(resample, config.alpha);
  });
}

std::vector<std::pair<QpProblem, QpSolution>> debug_endpoint_problems(
    const SortedSample& sample, const SpinConfig& config, Method method) {
  if (method != Method::Spin && method != Method::CentralQp)
    throw std::invalid_argument("QP diagnostics exist only for the QP-weighted methods");
  validate_config(sample, config);
  const SortedSample aug = augment_bounds(sample, config.lower_bound, config.upper_bound);
  const int b = (config.bandwidth_b != 0) ? config.bandwidth_b : default_bandwidth(aug.n());
  const KdeDensity kde(aug);
  const auto plans = (method == Method::Spin) ? plan_spin(aug, config.alpha)
                                              : plan_central(aug, config.alpha);
  std::vector<std::pair<QpProblem, QpSolution>> out;
  for (const EndpointPlan& plan : {plans.first, plans.second}) {
    PosedEndpoint posed = pose_endpoint(aug, kde, plan, b, config);
    out.emplace_back(std::move(posed.problem), std::move(posed.solution));
  }
  return out;
}

}  // namespace spin
