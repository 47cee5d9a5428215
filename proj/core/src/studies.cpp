#include "reginn/studies.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "reginn/errors.hpp"

namespace fs = std::filesystem;

namespace reginn {
namespace {

std::uint64_t noise_seed_for(std::uint64_t seed, double delta) {
  // Decouple the data perturbation from the e0 signs and the grid ordering.
  return seed ^ (std::bit_cast<std::uint64_t>(delta) * 0x9E3779B97F4A7C15ULL);
}

template <typename F>
void parallel_for(int workers, std::size_t count, F&& body) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_guard;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_guard);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

SolverConfig cell_config(const StudySpec& spec) {
  SolverConfig cfg = spec.config;
  cfg.trace_mu = spec.mu;
  cfg.trace_a = spec.a;
  return cfg;
}

CellResult run_cell(const StudySpec& spec, double delta, std::uint64_t seed,
                    RunTrace* trace_out = nullptr) {
  const ProblemInstance inst = make_instance(spec, seed);
  const NoisyData data = make_noisy_data(inst.y, delta, noise_seed_for(seed, delta));
  const RunTrace trace =
      solve(*inst.model, inst.basis, data.y_delta, delta, inst.x0, cell_config(spec),
            &inst.x_true);

  CellResult cell;
  cell.delta = delta;
  cell.seed = seed;
  cell.n_delta = trace.n_delta;
  cell.t_total = trace.t_total;
  cell.total_work = trace.total_work;
  cell.final_residual = trace.final_residual;
  cell.stop_reason = trace.stop_reason;
  const ScaleVector e = attach(inst.basis, trace.x_final - inst.x_true);
  for (double r : spec.r_list) cell.err_r.push_back(norm_t(inst.basis, r, e));
  cell.err_s = norm_t(inst.basis, spec.config.s, e);
  cell.err_0 = e.coeffs.norm();
  if (trace_out) *trace_out = trace;
  return cell;
}

std::vector<CellResult> run_grid(const StudySpec& spec) {
  struct Key {
    double delta;
    std::uint64_t seed;
  };
  std::vector<Key> keys;
  for (double d : spec.delta_list)
    for (std::uint64_t s : spec.seeds) keys.push_back({d, s});

  std::vector<CellResult> cells(keys.size());
  parallel_for(spec.workers, keys.size(),
               [&](std::size_t i) { cells[i] = run_cell(spec, keys[i].delta, keys[i].seed); });

  std::string bad;
  for (const CellResult& c : cells)
    if (c.stop_reason != StopReason::Discrepancy) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), " [delta=%g seed=%llu -> %s]", c.delta,
                    static_cast<unsigned long long>(c.seed), to_string(c.stop_reason).c_str());
      bad += buf;
    }
  if (!bad.empty())
    throw StudyError("study: cells missed the discrepancy stop:" + bad);
  return cells;
}

double geometric_mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += std::log(std::max(x, 1e-300));
  return std::exp(acc / static_cast<double>(v.size()));
}

std::string study_tag(const StudySpec& spec) {
  return std::string(to_string(spec.config.kind)) + "_" + to_string(spec.problem);
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
  std::ofstream os(path);
  if (!os) throw StudyError("study: cannot write " + path);
  os << header << "\n";
  for (const std::string& r : rows) os << r << "\n";
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_cells_csv(const StudySpec& spec, const std::string& stem,
                     const std::vector<CellResult>& cells) {
  if (spec.out_dir.empty()) return;
  fs::create_directories(spec.out_dir);
  std::string header = "delta,seed,n_delta,t_total,total_work,final_residual,stop_reason,err_s,err_0";
  for (double r : spec.r_list) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), ",err_r=%g", r);
    header += buf;
  }
  std::vector<std::string> rows;
  for (const CellResult& c : cells) {
    std::ostringstream ss;
    ss << fmt(c.delta) << "," << c.seed << "," << c.n_delta << "," << fmt(c.t_total) << ","
       << c.total_work << "," << fmt(c.final_residual) << "," << to_string(c.stop_reason) << ","
       << fmt(c.err_s) << "," << fmt(c.err_0);
    for (double e : c.err_r) ss << "," << fmt(e);
    rows.push_back(ss.str());
  }
  write_csv((fs::path(spec.out_dir) / (stem + "_cells.csv")).string(), header, rows);
}

}  // namespace

std::vector<double> default_noise_grid() {
  return {1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5};
}

std::string to_string(ProblemKind p) {
  switch (p) {
    case ProblemKind::Diagonal: return "diagonal";
    case ProblemKind::Hammerstein: return "hammerstein";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "diagonal") return ProblemKind::Diagonal;
  if (name == "hammerstein") return ProblemKind::Hammerstein;
  throw ArgumentError("unknown problem kind: " + name);
}

namespace {

// Problem-level checks shared by single runs (no noise grid needed).
void validate_problem(const StudySpec& spec) {
  validate(spec.config);
  if (spec.n < 2) throw ArgumentError("study: need n >= 2");
  if (!(spec.a > 0.0)) throw ArgumentError("study: need a > 0");
  if (spec.problem == ProblemKind::Hammerstein && spec.a != 1.0)
    throw ArgumentError("study: the hammerstein forward map smooths by exactly one order; set a=1");
  if (!(spec.beta_cubic >= 0.0)) throw ArgumentError("study: need beta_cubic >= 0");
  if (!(spec.mu > spec.config.s))
    throw ArgumentError("study: need mu > s");
  if (!(spec.mu <= spec.a + 2.0 * spec.config.s))
    throw ArgumentError("study: mu exceeds the scheme qualification a + 2s");
  if (!(spec.omega_norm > 0.0)) throw ArgumentError("study: need omega_norm > 0");
  for (double r : spec.r_list)
    if (r < -spec.a - 1e-12 || r > spec.config.s + 1e-12)
      throw ArgumentError("study: report norms must lie in [-a, s]");
}

}  // namespace

void validate(const StudySpec& spec) {
  validate_problem(spec);
  if (spec.delta_list.empty()) throw ArgumentError("study: empty noise grid");
  for (std::size_t i = 0; i < spec.delta_list.size(); ++i) {
    if (!(spec.delta_list[i] > 0.0)) throw ArgumentError("study: noise levels must be positive");
    if (i > 0 && !(spec.delta_list[i] < spec.delta_list[i - 1]))
      throw ArgumentError("study: noise grid must decrease strictly");
  }
  if (spec.seeds.empty()) throw ArgumentError("study: need at least one seed");
}

ProblemInstance make_instance(const StudySpec& spec, std::uint64_t seed) {
  validate_problem(spec);
  ScaleBasis basis = integer_spectrum_basis(spec.n);
  std::shared_ptr<ForwardModel> model;
  if (spec.problem == ProblemKind::Diagonal)
    model = make_diagonal_linear_model(spec.n, spec.a);
  else
    model = make_hammerstein_model(spec.n, spec.beta_cubic);

  SourceSpec src;
  src.mu = spec.mu;
  src.omega_norm = spec.omega_norm;
  src.seed = seed;
  auto [x_true, x0] =
      make_source_solution(*model, basis, src, spec.config.s, spec.a + 2.0 * spec.config.s);

  const double ball = model->domain_ball_radius();
  if (x0.coeffs.norm() > ball || x_true.coeffs.norm() > ball)
    throw ArgumentError("study: start or solution leaves the model's trust ball");

  ProblemInstance inst{std::move(basis), std::move(model), std::move(x_true.coeffs),
                       std::move(x0.coeffs), Eigen::VectorXd()};
  inst.y = inst.model->evaluate(inst.x_true);
  return inst;
}

FitLine fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ArgumentError("fit_line: need two or more matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) throw ArgumentError("fit_line: degenerate abscissae");
  FitLine f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = f.slope * x[i] + f.intercept;
    ss_res += (y[i] - p) * (y[i] - p);
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

namespace {

void require_sweep_shape(const StudySpec& spec) {
  if (spec.delta_list.size() < 4 ||
      spec.delta_list.front() / spec.delta_list.back() < 999.0)
    throw ArgumentError("study: need at least four noise levels spanning three decades");
  if (spec.seeds.size() < 3) throw ArgumentError("study: need at least three seeds");
}

}  // namespace

RateStudyResult run_rate_study(const StudySpec& spec) {
  validate(spec);
  require_sweep_shape(spec);
  RateStudyResult out;
  out.cells = run_grid(spec);
  out.delta = spec.delta_list;

  const std::size_t nr = spec.r_list.size();
  out.err_geo.assign(nr, std::vector<double>(spec.delta_list.size(), 0.0));
  for (std::size_t j = 0; j < spec.delta_list.size(); ++j) {
    for (std::size_t i = 0; i < nr; ++i) {
      std::vector<double> vals;
      for (const CellResult& c : out.cells)
        if (c.delta == spec.delta_list[j]) vals.push_back(c.err_r[i]);
      out.err_geo[i][j] = geometric_mean(vals);
    }
  }

  std::vector<double> logd;
  for (double d : spec.delta_list) logd.push_back(std::log(d));
  for (std::size_t i = 0; i < nr; ++i) {
    std::vector<double> loge;
    for (double e : out.err_geo[i]) loge.push_back(std::log(std::max(e, 1e-300)));
    out.fits.push_back(fit_line(logd, loge));
  }

  if (!spec.out_dir.empty()) {
    fs::create_directories(spec.out_dir);
    std::string header = "delta";
    for (double r : spec.r_list) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), ",err_r=%g", r);
      header += buf;
    }
    std::vector<std::string> rows;
    for (std::size_t j = 0; j < spec.delta_list.size(); ++j) {
      std::string row = fmt(spec.delta_list[j]);
      for (std::size_t i = 0; i < nr; ++i) row += "," + fmt(out.err_geo[i][j]);
      rows.push_back(row);
    }
    const std::string tag = study_tag(spec);
    write_csv((fs::path(spec.out_dir) / ("rate_" + tag + ".csv")).string(), header, rows);

    std::vector<std::string> fit_rows;
    for (std::size_t i = 0; i < nr; ++i) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%g", spec.r_list[i]);
      fit_rows.push_back(std::string(buf) + "," + fmt(out.fits[i].slope) + "," +
                         fmt(out.fits[i].intercept) + "," + fmt(out.fits[i].r2));
    }
    write_csv((fs::path(spec.out_dir) / ("rate_" + tag + "_fits.csv")).string(),
              "r,slope,intercept,r2", fit_rows);
    write_cells_csv(spec, "rate_" + tag, out.cells);
  }
  return out;
}

CountStudyResult run_count_study(const StudySpec& spec) {
  validate(spec);
  require_sweep_shape(spec);
  CountStudyResult out;
  out.cells = run_grid(spec);
  out.delta = spec.delta_list;

  for (double d : spec.delta_list) {
    double n_acc = 0.0;
    std::vector<double> ts;
    int count = 0;
    for (const CellResult& c : out.cells)
      if (c.delta == d) {
        n_acc += c.n_delta;
        if (c.t_total > 0.0) ts.push_back(c.t_total);  // skip n_delta = 0 cells
        ++count;
      }
    out.n_mean.push_back(n_acc / count);
    out.t_geo.push_back(ts.empty() ? std::numeric_limits<double>::quiet_NaN()
                                   : geometric_mean(ts));
  }

  std::vector<double> loginv, loginv_t, logt;
  for (std::size_t j = 0; j < spec.delta_list.size(); ++j) {
    loginv.push_back(std::log(1.0 / spec.delta_list[j]));
    if (!std::isnan(out.t_geo[j])) {
      loginv_t.push_back(loginv.back());
      logt.push_back(std::log(out.t_geo[j]));
    }
  }
  out.n_fit = fit_line(loginv, out.n_mean);
  if (loginv_t.size() >= 2) out.t_fit = fit_line(loginv_t, logt);
  else out.t_fit = {std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN()};

  if (!spec.out_dir.empty()) {
    fs::create_directories(spec.out_dir);
    std::vector<std::string> rows;
    for (std::size_t j = 0; j < spec.delta_list.size(); ++j)
      rows.push_back(fmt(spec.delta_list[j]) + "," + fmt(out.n_mean[j]) + "," +
                     fmt(out.t_geo[j]));
    const std::string tag = study_tag(spec);
    write_csv((fs::path(spec.out_dir) / ("count_" + tag + ".csv")).string(),
              "delta,n_mean,t_geo", rows);
    write_csv((fs::path(spec.out_dir) / ("count_" + tag + "_fits.csv")).string(),
              "quantity,slope,intercept,r2",
              {"n_vs_loginv," + fmt(out.n_fit.slope) + "," + fmt(out.n_fit.intercept) + "," +
                   fmt(out.n_fit.r2),
               "logt_vs_loginv," + fmt(out.t_fit.slope) + "," + fmt(out.t_fit.intercept) + "," +
                   fmt(out.t_fit.r2)});
    write_cells_csv(spec, "count_" + tag, out.cells);
  }
  return out;
}

SingleRun run_single(const StudySpec& spec, double delta, std::uint64_t seed) {
  validate_problem(spec);
  if (!(delta >= 0.0)) throw ArgumentError("run_single: need delta >= 0");
  SingleRun out;
  out.cell = run_cell(spec, delta, seed, &out.trace);
  if (!spec.out_dir.empty()) {
    fs::create_directories(spec.out_dir);
    char name[160];
    std::snprintf(name, sizeof(name), "trace_%s_d%g_s%llu.csv", study_tag(spec).c_str(), delta,
                  static_cast<unsigned long long>(seed));
    const std::string path = (fs::path(spec.out_dir) / name).string();
    std::ofstream os(path);
    if (!os) throw StudyError("run_single: cannot write " + path);
    write_trace_csv(os, out.trace);
    out.trace_path = path;
  }
  return out;
}

}  // namespace reginn
