#include "spin/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <tuple>
#include <utility>

#include "spin/distributions.hpp"
#include "spin/empirical.hpp"
#include "spin/rng.hpp"
#include "spin/spin.hpp"
#include "spin/svg.hpp"

namespace spin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string gshort(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// Empty cell for statistics that do not apply to a row.
std::string csv_num(double x) { return std::isnan(x) ? std::string() : g17(x); }

// Compensated summation; accumulation order is always replicate order, which
// keeps aggregates bit-identical regardless of how many workers filled the rows.
struct Kahan {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

double kahan_mean(const std::vector<double>& v, int* count_out = nullptr) {
  Kahan k;
  int cnt = 0;
  for (double x : v)
    if (!std::isnan(x)) {
      k.add(x);
      ++cnt;
    }
  if (count_out) *count_out = cnt;
  return cnt ? k.s / cnt : kNaN;
}

double kahan_mean_sq(const std::vector<double>& v) {
  Kahan k;
  int cnt = 0;
  for (double x : v)
    if (!std::isnan(x)) {
      k.add(x * x);
      ++cnt;
    }
  return cnt ? k.s / cnt : kNaN;
}

EndpointStats endpoint_stats(const std::vector<double>& errs) {
  EndpointStats st;
  int cnt = 0;
  st.bias = kahan_mean(errs, &cnt);
  const double mse = kahan_mean_sq(errs);
  st.variance = mse - st.bias * st.bias;
  st.rmse = std::sqrt(std::max(mse, 0.0));
  // se(mse) = sd(e^2)/sqrt(R); se(rmse) = se(mse) / (2 rmse).
  Kahan dev;
  for (double e : errs)
    if (!std::isnan(e)) {
      const double d = e * e - mse;
      dev.add(d * d);
    }
  if (cnt > 1 && st.rmse > 0.0) {
    const double se_mse = std::sqrt(dev.s / (cnt - 1) / cnt);
    st.mc_stderr_rmse = se_mse / (2.0 * st.rmse);
  }
  return st;
}

const Distribution& coverage_dist(const std::unique_ptr<Distribution>& dist,
                                  const NormalDist& std_normal, bool is_gibbs) {
  return is_gibbs ? static_cast<const Distribution&>(std_normal) : *dist;
}

}  // namespace

std::string ExperimentCell::cell_id() const {
  return dist + "-n" + std::to_string(n) + "-a" + gshort(alpha);
}

ReplicationReport run_cell(const ExperimentCell& cell, int workers, bool keep_raw) {
  if (cell.replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (cell.methods.empty()) throw std::invalid_argument("cell lists no methods");
  for (Method m : cell.methods)
    if (m == Method::TrueHpd) throw std::invalid_argument("true-hpd is an oracle, not a method");
  workers = std::clamp(workers, 1, 64);

  const bool is_gibbs = (cell.dist == "gibbs");
  std::unique_ptr<Distribution> dist;
  const NormalDist std_normal(0.0, 1.0);
  if (!is_gibbs) dist = make_distribution(cell.dist);
  const Distribution& cov_dist = coverage_dist(dist, std_normal, is_gibbs);

  const IntervalEstimate truth = true_hpd(cov_dist, cell.alpha);
  const int R = cell.replications;
  const int M = static_cast<int>(cell.methods.size());

  std::vector<std::vector<double>> el(M, std::vector<double>(R, kNaN));
  std::vector<std::vector<double>> eu(M, std::vector<double>(R, kNaN));
  std::vector<std::vector<double>> cov(M, std::vector<double>(R, kNaN));

  const RngStream cell_stream(cell.seed);
  auto run_range = [&](int r0, int r1, std::string* error_out) {
    try {
      for (int r = r0; r < r1; ++r) {
        const RngStream rep = cell_stream.substream(static_cast<std::uint64_t>(r));
        SortedSample sample =
            is_gibbs ? gibbs_bivariate_normal(cell.n, cell.gibbs.thin, cell.gibbs.rho,
                                              rep.child_seed(0))
                     : [&] {
                         RngStream draw_rng = rep.substream(0);
                         return sample_iid(*dist, cell.n, draw_rng);
                       }();
        for (int mi = 0; mi < M; ++mi) {
          const Method method = cell.methods[static_cast<std::size_t>(mi)];
          try {
            IntervalEstimate est;
            switch (method) {
              case Method::EmpiricalShortest:
                est = empirical_shortest(sample, cell.alpha).first;
                break;
              case Method::EmpiricalCentral:
                est = empirical_central(sample, cell.alpha);
                break;
              case Method::GaussianFit:
                est = gaussian_fit_interval(sample, cell.alpha);
                break;
              case Method::Spin:
              case Method::CentralQp: {
                SpinConfig cfg;
                cfg.alpha = cell.alpha;
                cfg.bootstrap_B = cell.bootstrap_B;
                cfg.lower_bound = cell.lower_bound;
                cfg.upper_bound = cell.upper_bound;
                cfg.seed = rep.child_seed(2 + static_cast<std::uint64_t>(method));
                est = (method == Method::Spin) ? spin_interval(sample, cfg).interval
                                               : central_qp_interval(sample, cfg).interval;
                break;
              }
              case Method::TrueHpd:
                continue;  // rejected above
            }
            el[static_cast<std::size_t>(mi)][static_cast<std::size_t>(r)] = est.lower - truth.lower;
            eu[static_cast<std::size_t>(mi)][static_cast<std::size_t>(r)] = est.upper - truth.upper;
            cov[static_cast<std::size_t>(mi)][static_cast<std::size_t>(r)] =
                cov_dist.cdf(est.upper) - cov_dist.cdf(est.lower);
          } catch (const std::exception&) {
            // estimator failure for this replicate: row stays NaN, counted below
          }
        }
      }
    } catch (const std::exception& e) {
      *error_out = e.what();
    }
  };

  if (workers == 1) {
    std::string err;
    run_range(0, R, &err);
    if (!err.empty()) throw std::runtime_error("cell " + cell.cell_id() + ": " + err);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::string> errs(static_cast<std::size_t>(workers));
    const int chunk = (R + workers - 1) / workers;
    for (int wi = 0; wi < workers; ++wi) {
      const int r0 = wi * chunk;
      const int r1 = std::min(R, r0 + chunk);
      if (r0 >= r1) break;
      pool.emplace_back(run_range, r0, r1, &errs[static_cast<std::size_t>(wi)]);
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errs)
      if (!e.empty()) throw std::runtime_error("cell " + cell.cell_id() + ": " + e);
  }

  ReplicationReport report;
  report.cell = cell;
  report.true_lower = truth.lower;
  report.true_upper = truth.upper;
  report.coverage = cov;
  if (keep_raw) {
    report.errors_lower = el;
    report.errors_upper = eu;
    report.has_raw = true;
  }

  // Index of the empirical-shortest baseline, if the cell ran it.
  int short_mi = -1;
  for (int mi = 0; mi < M; ++mi)
    if (cell.methods[static_cast<std::size_t>(mi)] == Method::EmpiricalShortest) short_mi = mi;

  for (int mi = 0; mi < M; ++mi) {
    MethodReport mr;
    mr.method = cell.methods[static_cast<std::size_t>(mi)];
    const auto& ml = el[static_cast<std::size_t>(mi)];
    const auto& mu = eu[static_cast<std::size_t>(mi)];
    int ok = 0;
    for (double e : ml)
      if (!std::isnan(e)) ++ok;
    mr.failures = R - ok;
    if (mr.failures * 100 > R)
      throw std::runtime_error("cell " + cell.cell_id() + ": method " +
                               method_token(mr.method) + " failed in " +
                               std::to_string(mr.failures) + " of " + std::to_string(R) +
                               " replicates (> 1%)");
    mr.lower = endpoint_stats(ml);
    mr.upper = endpoint_stats(mu);
    int cov_cnt = 0;
    mr.coverage_mean = kahan_mean(cov[static_cast<std::size_t>(mi)], &cov_cnt);
    if (cov_cnt > 1) {
      Kahan dev;
      for (double c : cov[static_cast<std::size_t>(mi)])
        if (!std::isnan(c)) {
          const double d = c - mr.coverage_mean;
          dev.add(d * d);
        }
      mr.coverage_stderr = std::sqrt(dev.s / (cov_cnt - 1) / cov_cnt);
    }

    if (short_mi >= 0) {
      const auto& sl = el[static_cast<std::size_t>(short_mi)];
      const auto& su = eu[static_cast<std::size_t>(short_mi)];
      const double mse_sl = kahan_mean_sq(sl), mse_su = kahan_mean_sq(su);
      const double mse_ml = kahan_mean_sq(ml), mse_mu = kahan_mean_sq(mu);
      mr.efficiency_lower = mse_sl / mse_ml;
      mr.efficiency_upper = mse_su / mse_mu;
      mr.efficiency = (mse_sl + mse_su) / (mse_ml + mse_mu);

      // Paired delta-method stderr for the ratio of summed MSEs over the
      // replicates where both methods succeeded.
      Kahan ka, kb;
      int np = 0;
      for (int r = 0; r < R; ++r) {
        const std::size_t rr = static_cast<std::size_t>(r);
        if (std::isnan(sl[rr]) || std::isnan(ml[rr])) continue;
        ka.add(sl[rr] * sl[rr] + su[rr] * su[rr]);
        kb.add(ml[rr] * ml[rr] + mu[rr] * mu[rr]);
        ++np;
      }
      if (np > 1) {
        const double abar = ka.s / np, bbar = kb.s / np;
        Kahan va, vb, cab;
        for (int r = 0; r < R; ++r) {
          const std::size_t rr = static_cast<std::size_t>(r);
          if (std::isnan(sl[rr]) || std::isnan(ml[rr])) continue;
          const double da = sl[rr] * sl[rr] + su[rr] * su[rr] - abar;
          const double db = ml[rr] * ml[rr] + mu[rr] * mu[rr] - bbar;
          va.add(da * da);
          vb.add(db * db);
          cab.add(da * db);
        }
        const double var_a = va.s / (np - 1), var_b = vb.s / (np - 1), cov_ab = cab.s / (np - 1);
        const double gr = abar / bbar;
        const double v = (var_a - 2.0 * gr * cov_ab + gr * gr * var_b) / (np * bbar * bbar);
        mr.efficiency_stderr = std::sqrt(std::max(v, 0.0));
      }
    } else {
      mr.efficiency_lower = mr.efficiency_upper = mr.efficiency = kNaN;
      mr.efficiency_stderr = kNaN;
    }
    report.methods.push_back(std::move(mr));
  }
  return report;
}

void emit_csv(const std::vector<ReplicationReport>& reports, std::ostream& os) {
  os << "cell_id,dist,n,alpha,method,endpoint,rmse,bias,variance,coverage_mean,efficiency,"
        "mc_stderr_rmse,failures\n";
  for (const auto& rep : reports) {
    const std::string id = rep.cell.cell_id();
    for (const auto& mr : rep.methods) {
      const std::string prefix = id + "," + rep.cell.dist + "," + std::to_string(rep.cell.n) +
                                 "," + g17(rep.cell.alpha) + "," + method_token(mr.method) + ",";
      os << prefix << "lower," << g17(mr.lower.rmse) << "," << g17(mr.lower.bias) << ","
         << g17(mr.lower.variance) << "," << g17(mr.coverage_mean) << ","
         << csv_num(mr.efficiency_lower) << "," << g17(mr.lower.mc_stderr_rmse) << ","
         << mr.failures << "\n";
      os << prefix << "upper," << g17(mr.upper.rmse) << "," << g17(mr.upper.bias) << ","
         << g17(mr.upper.variance) << "," << g17(mr.coverage_mean) << ","
         << csv_num(mr.efficiency_upper) << "," << g17(mr.upper.mc_stderr_rmse) << ","
         << mr.failures << "\n";
      const double mse_sum = mr.lower.rmse * mr.lower.rmse + mr.upper.rmse * mr.upper.rmse;
      const double rmse_sum = std::sqrt(mse_sum);
      // se(sqrt(msum)) from the per-endpoint rmse standard errors:
      // se(msum) = sqrt(se_ml^2 + se_mu^2) with se_m = 2 rmse se_rmse.
      const double se_ml = 2.0 * mr.lower.rmse * mr.lower.mc_stderr_rmse;
      const double se_mu = 2.0 * mr.upper.rmse * mr.upper.mc_stderr_rmse;
      const double se_rmse_sum =
          rmse_sum > 0.0 ? std::sqrt(se_ml * se_ml + se_mu * se_mu) / (2.0 * rmse_sum) : 0.0;
      os << prefix << "both," << g17(rmse_sum) << ",,," << g17(mr.coverage_mean) << ","
         << csv_num(mr.efficiency) << "," << g17(se_rmse_sum) << "," << mr.failures << "\n";
    }
  }
}

void emit_raw_csv(const ReplicationReport& report, std::ostream& os) {
  if (!report.has_raw)
    throw std::invalid_argument("report was aggregated without the raw error dump");
  os << "cell_id,replicate,method,endpoint,error\n";
  const std::string id = report.cell.cell_id();
  const int R = report.cell.replications;
  for (int r = 0; r < R; ++r)
    for (std::size_t mi = 0; mi < report.methods.size(); ++mi) {
      const char* tok = method_token(report.methods[mi].method);
      const double elr = report.errors_lower[mi][static_cast<std::size_t>(r)];
      const double eur = report.errors_upper[mi][static_cast<std::size_t>(r)];
      os << id << "," << r << "," << tok << ",lower," << csv_num(elr) << "\n";
      os << id << "," << r << "," << tok << ",upper," << csv_num(eur) << "\n";
    }
}

// ---------------------------------------------------------------- plots

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

const char* method_color(Method m) { return kPalette[static_cast<int>(m) % 6]; }

struct Frame {
  double x0, x1, y0, y1;        // data ranges (padded)
  double px0, px1, py0, py1;    // pixel corners (py0 = bottom)
  double x(double v) const { return scale_to_px(v, x0, x1, px0, px1); }
  double y(double v) const { return scale_to_px(v, y0, y1, py0, py1); }
};

Frame make_frame(SvgCanvas& svg, double xlo, double xhi, double ylo, double yhi,
                 const std::string& title) {
  Frame f;
  std::tie(f.x0, f.x1) = nice_axis_range(xlo, xhi);
  std::tie(f.y0, f.y1) = nice_axis_range(ylo, yhi);
  f.px0 = 60.0;
  f.px1 = svg.width() - 20.0;
  f.py0 = svg.height() - 40.0;
  f.py1 = 30.0;
  svg.text(svg.width() / 2.0, 18.0, title, 13, "middle");
  svg.line(f.px0, f.py0, f.px1, f.py0, "#333333");
  svg.line(f.px0, f.py0, f.px0, f.py1, "#333333");
  for (int t = 0; t <= 4; ++t) {
    const double fx = f.x0 + (f.x1 - f.x0) * t / 4.0;
    const double fy = f.y0 + (f.y1 - f.y0) * t / 4.0;
    svg.line(f.x(fx), f.py0, f.x(fx), f.py0 + 4.0, "#333333");
    svg.text(f.x(fx), f.py0 + 16.0, gshort(fx), 10, "middle");
    svg.line(f.px0 - 4.0, f.y(fy), f.px0, f.y(fy), "#333333");
    svg.text(f.px0 - 6.0, f.y(fy) + 3.0, gshort(fy), 10, "end");
  }
  return f;
}

void write_file(const std::filesystem::path& path, const std::string& content,
                std::vector<std::string>& files) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << content;
  if (!os) throw std::runtime_error("failed writing " + path.string());
  files.push_back(path.filename().string());
}

}  // namespace

std::vector<std::string> emit_plots(const std::vector<ReplicationReport>& reports,
                                    const std::string& out_dir) {
  std::vector<std::string> files;
  if (reports.empty()) return files;
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  // --- efficiency vs n, one chart per (dist, alpha) group
  std::map<std::string, std::vector<const ReplicationReport*>> groups;
  for (const auto& rep : reports)
    groups[rep.cell.dist + "-a" + gshort(rep.cell.alpha)].push_back(&rep);
  for (const auto& [gid, members] : groups) {
    struct Series {
      Method method;
      std::vector<std::pair<double, double>> pts;
    };
    std::vector<Series> series;
    double ylo = 1.0, yhi = 1.0, xlo = 0.0, xhi = 0.0;
    bool any = false;
    for (const auto* rep : members)
      for (const auto& mr : rep->methods) {
        if (mr.method == Method::EmpiricalShortest || std::isnan(mr.efficiency)) continue;
        auto it = std::find_if(series.begin(), series.end(),
                               [&](const Series& s) { return s.method == mr.method; });
        if (it == series.end()) {
          series.push_back({mr.method, {}});
          it = series.end() - 1;
        }
        it->pts.emplace_back(rep->cell.n, mr.efficiency);
        if (!any) {
          xlo = xhi = rep->cell.n;
          ylo = std::min(1.0, mr.efficiency);
          yhi = std::max(1.0, mr.efficiency);
          any = true;
        } else {
          xlo = std::min(xlo, static_cast<double>(rep->cell.n));
          xhi = std::max(xhi, static_cast<double>(rep->cell.n));
          ylo = std::min(ylo, mr.efficiency);
          yhi = std::max(yhi, mr.efficiency);
        }
      }
    if (!any) continue;
    SvgCanvas svg(640, 420);
    Frame f = make_frame(svg, xlo, xhi, ylo, yhi, "efficiency vs n — " + gid);
    svg.line(f.px0, f.y(1.0), f.px1, f.y(1.0), "#999999", 0.8);
    double ly = 44.0;
    for (auto& s : series) {
      std::sort(s.pts.begin(), s.pts.end());
      std::vector<std::pair<double, double>> px_pts;
      for (auto [x, y] : s.pts) px_pts.emplace_back(f.x(x), f.y(y));
      svg.polyline(px_pts, method_color(s.method));
      for (auto [x, y] : px_pts) svg.circle(x, y, 3.0, method_color(s.method));
      svg.text(f.px1 - 120.0, ly, method_token(s.method), 11);
      svg.rect(f.px1 - 136.0, ly - 8.0, 10.0, 8.0, method_color(s.method));
      ly += 14.0;
    }
    write_file(dir / ("efficiency-" + gid + ".svg"), svg.str(), files);
  }

  // --- stacked bias^2 / variance bars and coverage histograms, per cell
  for (const auto& rep : reports) {
    const std::string id = rep.cell.cell_id();
    {
      SvgCanvas svg(640, 420);
      double ymax = 0.0;
      for (const auto& mr : rep.methods)
        ymax = std::max({ymax, mr.lower.rmse * mr.lower.rmse, mr.upper.rmse * mr.upper.rmse});
      Frame f = make_frame(svg, 0.0, 2.0 * rep.methods.size(), 0.0, ymax,
                           "bias^2 + variance — " + id);
      double slot = 0.0;
      for (const auto& mr : rep.methods) {
        for (int side = 0; side < 2; ++side) {
          const EndpointStats& st = side ? mr.upper : mr.lower;
          const double b2 = st.bias * st.bias;
          const double x_left = f.x(slot + 0.15), x_right = f.x(slot + 0.85);
          const double w = x_right - x_left;
          svg.rect(x_left, f.y(b2), w, f.y(0.0) - f.y(b2), "#d62728");
          svg.rect(x_left, f.y(b2 + st.variance), w, f.y(b2) - f.y(b2 + st.variance), "#1f77b4");
          svg.text((x_left + x_right) / 2.0, f.py0 + 28.0,
                   std::string(method_token(mr.method)) + (side ? "/u" : "/l"), 9, "middle");
          slot += 1.0;
        }
      }
      svg.rect(f.px1 - 136.0, 36.0, 10.0, 8.0, "#d62728");
      svg.text(f.px1 - 120.0, 44.0, "bias^2", 11);
      svg.rect(f.px1 - 136.0, 50.0, 10.0, 8.0, "#1f77b4");
      svg.text(f.px1 - 120.0, 58.0, "variance", 11);
      write_file(dir / ("biasvar-" + id + ".svg"), svg.str(), files);
    }
    {
      double clo = 1.0, chi = 0.0;
      for (const auto& mcov : rep.coverage)
        for (double c : mcov)
          if (!std::isnan(c)) {
            clo = std::min(clo, c);
            chi = std::max(chi, c);
          }
      if (clo > chi) continue;  // nothing but failures
      const int bins = 30;
      int peak = 0;
      std::vector<std::vector<int>> hist(rep.coverage.size(), std::vector<int>(bins, 0));
      for (std::size_t mi = 0; mi < rep.coverage.size(); ++mi)
        for (double c : rep.coverage[mi])
          if (!std::isnan(c)) {
            int b = (chi > clo) ? static_cast<int>((c - clo) / (chi - clo) * bins) : 0;
            b = std::clamp(b, 0, bins - 1);
            peak = std::max(peak, ++hist[mi][static_cast<std::size_t>(b)]);
          }
      SvgCanvas svg(640, 420);
      Frame f = make_frame(svg, clo, chi, 0.0, peak, "coverage — " + id);
      svg.line(f.x(1.0 - rep.cell.alpha), f.py0, f.x(1.0 - rep.cell.alpha), f.py1, "#999999",
               0.8);
      double ly = 44.0;
      for (std::size_t mi = 0; mi < rep.coverage.size(); ++mi) {
        const Method m = rep.methods[mi].method;
        std::vector<std::pair<double, double>> steps;
        for (int b = 0; b < bins; ++b) {
          const double xl = clo + (chi - clo) * b / bins;
          const double xr = clo + (chi - clo) * (b + 1) / bins;
          const double y = f.y(hist[mi][static_cast<std::size_t>(b)]);
          steps.emplace_back(f.x(xl), y);
          steps.emplace_back(f.x(xr), y);
        }
        svg.polyline(steps, method_color(m), 1.2);
        svg.text(f.px1 - 120.0, ly, method_token(m), 11);
        svg.rect(f.px1 - 136.0, ly - 8.0, 10.0, 8.0, method_color(m));
        ly += 14.0;
      }
      write_file(dir / ("coverage-" + id + ".svg"), svg.str(), files);
    }
  }
  return files;
}

}  // namespace spin
