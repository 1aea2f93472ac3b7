#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "spin/bench.hpp"
#include "spin/cli.hpp"
#include "spin/distributions.hpp"
#include "spin/empirical.hpp"
#include "spin/qp.hpp"
#include "spin/samples.hpp"
#include "spin/spin.hpp"

namespace spin {

namespace {

using nlohmann::ordered_json;

std::string fmt10(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

Method parse_method(const std::string& tok) {
  if (tok == "spin") return Method::Spin;
  if (tok == "shortest") return Method::EmpiricalShortest;
  if (tok == "central") return Method::EmpiricalCentral;
  if (tok == "central-qp") return Method::CentralQp;
  if (tok == "gaussian") return Method::GaussianFit;
  throw std::invalid_argument("unknown method \"" + tok +
                              "\" (expected spin|shortest|central|central-qp|gaussian)");
}

std::vector<Method> parse_methods(const std::vector<std::string>& toks) {
  std::vector<Method> methods;
  for (const auto& tok : toks) {
    const Method m = parse_method(tok);
    if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
  }
  return methods;
}

bool is_qp_method(Method m) { return m == Method::Spin || m == Method::CentralQp; }

int parse_bandwidth(const std::string& tok) {
  if (tok == "auto") return 0;
  int b = 0;
  const char* first = tok.data();
  const char* last = first + tok.size();
  const auto [ptr, ec] = std::from_chars(first, last, b);
  if (ec != std::errc() || ptr != last)
    throw std::invalid_argument("--bandwidth expects an integer or \"auto\", got \"" + tok +
                                "\"");
  return b;
}

void apply_compat(SpinConfig* cfg, const std::vector<std::string>& tokens) {
  for (const auto& tok : tokens) {
    if (tok == "no-bias-matrix")
      cfg->bias_corrected_matrix = false;
    else if (tok == "qpp-ratio")
      cfg->curvature_ratio_qpp = true;
    else
      throw std::invalid_argument("unknown --compat switch \"" + tok +
                                  "\" (expected no-bias-matrix and/or qpp-ratio)");
  }
}

ordered_json objective_json(const ObjectiveSummary& s) {
  ordered_json j;
  j["mean"] = s.mean;
  j["min"] = s.min;
  j["max"] = s.max;
  return j;
}

ordered_json diagnostics_json(const SpinDiagnostics& d, int bootstrap_B) {
  ordered_json j;
  j["bandwidth_b"] = d.bandwidth_b;
  j["bootstrap_B"] = bootstrap_B;
  j["dropped_replicates"] = d.dropped_replicates;
  j["clamped_density_count"] = d.clamped_density_count;
  j["clipped_window_lower"] = d.clipped_window_lower;
  j["clipped_window_upper"] = d.clipped_window_upper;
  j["lower_objective"] = objective_json(d.lower_objective);
  j["upper_objective"] = objective_json(d.upper_objective);
  return j;
}

struct IntervalArgs {
  std::string input;
  double alpha = 0.05;
  std::vector<std::string> method_toks;
  std::optional<double> lower_bound;
  std::optional<double> upper_bound;
  int bootstrap = 50;
  std::string bandwidth = "auto";
  std::uint64_t seed = 1;
  std::vector<std::string> compat;
  bool json = false;
  std::string debug_qp;
};

int cmd_interval(const IntervalArgs& a, std::ostream& out, std::ostream& err) {
  if (!(a.alpha > 0.0 && a.alpha < 1.0))
    throw std::invalid_argument("alpha must lie strictly between 0 and 1");
  const std::vector<Method> methods =
      parse_methods(a.method_toks.empty() ? std::vector<std::string>{"spin"} : a.method_toks);

  SpinConfig cfg;
  cfg.alpha = a.alpha;
  cfg.bootstrap_B = a.bootstrap;
  cfg.bandwidth_b = parse_bandwidth(a.bandwidth);
  cfg.lower_bound = a.lower_bound;
  cfg.upper_bound = a.upper_bound;
  cfg.seed = a.seed;
  apply_compat(&cfg, a.compat);

  const std::vector<double> draws = read_draws_file(a.input);
  const SortedSample sample = SortedSample::from_raw(draws);
  err << a.input << ": " << sample.n() << " draws\n";

  if (!a.debug_qp.empty()) {
    bool any = false;
    std::ofstream df(a.debug_qp, std::ios::binary);
    if (!df) throw std::runtime_error(a.debug_qp + ": cannot open for writing");
    for (const Method m : methods) {
      if (!is_qp_method(m)) continue;
      const auto posed = debug_endpoint_problems(sample, cfg, m);
      const char* side[] = {"lower", "upper"};
      for (std::size_t i = 0; i < posed.size(); ++i)
        df << "## " << method_token(m) << " " << side[i] << " endpoint\n"
           << dump_problem(posed[i].first, &posed[i].second) << "\n";
      any = true;
    }
    if (!any)
      throw std::invalid_argument("--debug-qp requires a QP-weighted method (spin or central-qp)");
    if (!df) throw std::runtime_error(a.debug_qp + ": write failed");
    err << "wrote QP dump to " << a.debug_qp << "\n";
  }

  ordered_json intervals = ordered_json::array();
  std::string text;
  text += "method\tlower\tupper\talpha\tn\n";
  for (const Method m : methods) {
    IntervalEstimate est;
    ordered_json diag = ordered_json::object();
    switch (m) {
      case Method::Spin:
      case Method::CentralQp: {
        const SpinResult r =
            (m == Method::Spin) ? spin_interval(sample, cfg) : central_qp_interval(sample, cfg);
        est = r.interval;
        diag = diagnostics_json(r.diagnostics, cfg.bootstrap_B);
        err << method_token(m) << ": bandwidth " << r.diagnostics.bandwidth_b << ", dropped "
            << r.diagnostics.dropped_replicates << "/" << cfg.bootstrap_B
            << ", density clamps " << r.diagnostics.clamped_density_count << "\n";
        break;
      }
      case Method::EmpiricalShortest:
        est = empirical_shortest(sample, a.alpha).first;
        break;
      case Method::EmpiricalCentral:
        est = empirical_central(sample, a.alpha);
        break;
      case Method::GaussianFit:
        est = gaussian_fit_interval(sample, a.alpha);
        if (est.degenerate) diag["degenerate"] = true;
        break;
      case Method::TrueHpd:
        throw std::invalid_argument("true-hpd needs a distribution, not draws");
    }
    if (a.json) {
      ordered_json j;
      j["method"] = method_token(m);
      j["lower"] = est.lower;
      j["upper"] = est.upper;
      j["alpha"] = est.alpha;
      j["n"] = sample.n();
      j["diagnostics"] = diag;
      intervals.push_back(std::move(j));
    } else {
      text += std::string(method_token(m)) + "\t" + fmt10(est.lower) + "\t" + fmt10(est.upper) +
              "\t" + fmt10(est.alpha) + "\t" + std::to_string(sample.n()) + "\n";
    }
  }

  if (a.json) {
    ordered_json doc;
    doc["schema"] = 1;
    doc["input"] = a.input;
    doc["n"] = sample.n();
    doc["alpha"] = a.alpha;
    doc["intervals"] = std::move(intervals);
    out << doc.dump(2) << "\n";
  } else {
    out << text;
  }

  return 0;
}

struct BenchArgs {
  std::vector<std::string> dists;
  std::vector<int> ns;
  std::vector<double> alphas{0.05};
  int reps = 2000;
  std::vector<std::string> method_toks{"shortest", "spin"};
  std::string out_dir = "bench-out";
  std::uint64_t seed = 1;
  bool dump_raw = false;
  int workers = 1;
  double gibbs_rho = 0.9;
  int gibbs_thin = 10;
  std::optional<double> lower_bound;
  std::optional<double> upper_bound;
  int bootstrap = 50;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const std::vector<Method> methods = parse_methods(a.method_toks);
  if (methods.empty()) throw std::invalid_argument("--methods must name at least one method");
  const bool any_qp = std::any_of(methods.begin(), methods.end(), is_qp_method);
  for (const auto& d : a.dists) {
    if (d != "normal" && d != "t5" && d != "gamma3" && d != "exponential" && d != "gibbs")
      throw std::invalid_argument("unknown --dist \"" + d +
                                  "\" (expected normal|t5|gamma3|exponential|gibbs)");
  }
  for (const int n : a.ns) {
    if (n < 2) throw std::invalid_argument("--n values must be >= 2");
    if (any_qp && n < 10)
      throw std::invalid_argument("QP-weighted methods require n >= 10 (got " +
                                  std::to_string(n) + ")");
  }
  for (const double al : a.alphas)
    if (!(al > 0.0 && al < 1.0))
      throw std::invalid_argument("--alpha values must lie strictly between 0 and 1");
  if (a.reps < 100)
    err << "warning: fewer than 100 replications; Monte Carlo standard errors will be "
           "unreliable\n";

  std::vector<ReplicationReport> reports;
  for (const auto& d : a.dists)
    for (const int n : a.ns)
      for (const double al : a.alphas) {
        ExperimentCell cell;
        cell.dist = d;
        cell.n = n;
        cell.alpha = al;
        cell.replications = a.reps;
        cell.methods = methods;
        cell.seed = a.seed;
        cell.lower_bound = a.lower_bound;
        cell.upper_bound = a.upper_bound;
        cell.gibbs.rho = a.gibbs_rho;
        cell.gibbs.thin = a.gibbs_thin;
        cell.bootstrap_B = a.bootstrap;
        err << "running " << cell.cell_id() << " (" << a.reps << " replications)\n";
        reports.push_back(run_cell(cell, a.workers, a.dump_raw));
      }

  const std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;

  {
    const std::filesystem::path csv_path = dir / "results.csv";
    std::ofstream cs(csv_path, std::ios::binary);
    if (!cs) throw std::runtime_error(csv_path.string() + ": cannot open for writing");
    emit_csv(reports, cs);
    if (!cs) throw std::runtime_error(csv_path.string() + ": write failed");
    written.push_back(csv_path.string());
  }
  if (a.dump_raw)
    for (const auto& rep : reports) {
      const std::filesystem::path raw_path = dir / ("raw-" + rep.cell.cell_id() + ".csv");
      std::ofstream rs(raw_path, std::ios::binary);
      if (!rs) throw std::runtime_error(raw_path.string() + ": cannot open for writing");
      emit_raw_csv(rep, rs);
      if (!rs) throw std::runtime_error(raw_path.string() + ": write failed");
      written.push_back(raw_path.string());
    }
  for (const auto& name : emit_plots(reports, a.out_dir))
    written.push_back((dir / name).string());

  for (const auto& path : written) out << path << "\n";
  err << "wrote " << written.size() << " files to " << a.out_dir << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shortest probability intervals from Monte Carlo draws"};
  app.require_subcommand(1);

  IntervalArgs ia;
  CLI::App* iv = app.add_subcommand("interval", "Compute interval estimates from a draws file");
  iv->add_option("--input,-i", ia.input, "file of draws, one per line (\"-\" for stdin)")
      ->required();
  iv->add_option("--alpha,-a", ia.alpha, "miscoverage level in (0,1)")->capture_default_str();
  iv->add_option("--method,-m", ia.method_toks,
                 "spin|shortest|central|central-qp|gaussian (repeatable or comma list)")
      ->delimiter(',');
  iv->add_option("--lower-bound", ia.lower_bound,
                 "known lower support bound; inserts a pseudo-datapoint");
  iv->add_option("--upper-bound", ia.upper_bound,
                 "known upper support bound; inserts a pseudo-datapoint");
  iv->add_option("--bootstrap", ia.bootstrap, "bootstrap replicates for the weight average")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  iv->add_option("--bandwidth", ia.bandwidth, "QP window width (even integer) or \"auto\"")
      ->capture_default_str();
  iv->add_option("--seed", ia.seed, "RNG seed")->capture_default_str();
  iv->add_option("--compat", ia.compat,
                 "comma-separated switches: no-bias-matrix (quadratic form from plain "
                 "quantiles), qpp-ratio (curvature as Q/f^2)")
      ->delimiter(',');
  iv->add_flag("--json", ia.json, "emit a JSON document instead of text");
  iv->add_option("--debug-qp", ia.debug_qp,
                 "write the endpoint QP matrices and solutions to this file");

  BenchArgs ba;
  CLI::App* bn = app.add_subcommand("bench", "Run a benchmark grid; write CSV and SVG files");
  bn->add_option("--dist", ba.dists, "normal|t5|gamma3|exponential|gibbs (comma list)")
      ->delimiter(',')
      ->required();
  bn->add_option("--n", ba.ns, "sample sizes (comma list; kept draws for gibbs)")
      ->delimiter(',')
      ->required();
  bn->add_option("--alpha", ba.alphas, "miscoverage levels (comma list)")
      ->delimiter(',')
      ->capture_default_str();
  bn->add_option("--reps", ba.reps, "replications per cell")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bn->add_option("--methods", ba.method_toks, "methods to compare (comma list)")
      ->delimiter(',')
      ->capture_default_str();
  bn->add_option("--out", ba.out_dir, "output directory")->capture_default_str();
  bn->add_option("--seed", ba.seed, "base RNG seed (each replicate gets a substream)")
      ->capture_default_str();
  bn->add_flag("--dump-raw", ba.dump_raw, "also write per-replicate endpoint errors");
  bn->add_option("--workers", ba.workers, "worker threads (aggregation is order-fixed)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bn->add_option("--gibbs-rho", ba.gibbs_rho, "Gibbs bivariate-normal correlation")
      ->capture_default_str();
  bn->add_option("--gibbs-thin", ba.gibbs_thin, "Gibbs thinning factor")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bn->add_option("--lower-bound", ba.lower_bound,
                 "known lower support bound forwarded to the QP-weighted methods");
  bn->add_option("--upper-bound", ba.upper_bound,
                 "known upper support bound forwarded to the QP-weighted methods");
  bn->add_option("--bootstrap", ba.bootstrap, "bootstrap replicates inside spin/central-qp")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("spin");
  for (const auto& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (iv->parsed()) return cmd_interval(ia, out, err);
    return cmd_bench(ba, out, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace spin
