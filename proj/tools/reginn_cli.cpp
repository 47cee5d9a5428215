// Experiment driver for the regularized Newton solver library.
//
// Exit status: 0 on success, 2 when an experiment fails its stopping or
// verification requirements, 3 on bad arguments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "reginn/errors.hpp"
#include "reginn/filters.hpp"
#include "reginn/newton.hpp"
#include "reginn/studies.hpp"

namespace {

struct Options {
  std::string problem = "diagonal";
  std::string method = "landweber";
  long long n = 256;
  double a = 1.0;
  double s = 0.0;
  double mu = 1.0;
  double tau = 2.5;
  double eta = 0.85;
  double theta = 0.9;
  double omega_norm = 0.5;
  double beta_cubic = 0.1;
  int max_outer = 200;
  int workers = 0;
  std::vector<double> deltas;
  std::vector<std::uint64_t> seeds;
  std::vector<double> r_list;
  std::string out;

  // verify / filter-check extras
  std::string trace_file;
  double nu = 1.0;
  int samples = 1000;
  std::uint64_t check_seed = 7;
};

void add_problem_flags(CLI::App* sub, Options& o) {
  sub->add_option("--problem", o.problem, "forward model")
      ->check(CLI::IsMember({"diagonal", "hammerstein"}))
      ->capture_default_str();
  sub->add_option("--method", o.method, "inner regularization scheme")
      ->check(CLI::IsMember({"landweber", "implicit", "asymptotic", "tikhonov"}))
      ->capture_default_str();
  sub->add_option("--n", o.n, "discretization dimension")->capture_default_str();
  sub->add_option("--a", o.a, "smoothing order of the forward map")->capture_default_str();
  sub->add_option("--s", o.s, "preconditioning exponent")->capture_default_str();
  sub->add_option("--mu", o.mu, "smoothness index of the initial error")->capture_default_str();
  sub->add_option("--tau", o.tau, "discrepancy multiplier")->capture_default_str();
  sub->add_option("--eta", o.eta, "inner tolerance")->capture_default_str();
  sub->add_option("--theta", o.theta, "scaled derivative norm after rescaling")
      ->capture_default_str();
  sub->add_option("--delta", o.deltas, "noise level (repeatable)");
  sub->add_option("--seed", o.seeds, "realization seed (repeatable)");
  sub->add_option("--omega-norm", o.omega_norm, "norm of the initial error in the mu scale")
      ->capture_default_str();
  sub->add_option("--beta-cubic", o.beta_cubic, "hammerstein nonlinearity strength")
      ->capture_default_str();
  sub->add_option("--max-outer", o.max_outer, "outer iteration cap")->capture_default_str();
  sub->add_option("--r", o.r_list, "report error norms ||e||_r (repeatable)");
  sub->add_option("--workers", o.workers, "concurrent study cells, 0 = auto")
      ->capture_default_str();
  sub->add_option("--out", o.out, "artifact directory");
  sub->set_config("--config", "", "flat key=value file; command-line flags win");
}

reginn::StudySpec to_spec(const Options& o) {
  reginn::StudySpec spec;
  spec.problem = reginn::problem_kind_from_string(o.problem);
  spec.config.kind = reginn::filter_kind_from_string(o.method);
  spec.config.tau = o.tau;
  spec.config.eta = o.eta;
  spec.config.s = o.s;
  spec.config.theta = o.theta;
  spec.config.max_outer = o.max_outer;
  spec.n = o.n;
  spec.a = o.a;
  spec.beta_cubic = o.beta_cubic;
  spec.mu = o.mu;
  spec.omega_norm = o.omega_norm;
  spec.r_list = o.r_list.empty() ? std::vector<double>{0.0} : o.r_list;
  spec.delta_list = o.deltas.empty() ? reginn::default_noise_grid() : o.deltas;
  spec.seeds = o.seeds.empty() ? std::vector<std::uint64_t>{1, 2, 3, 4, 5} : o.seeds;
  spec.out_dir = o.out;
  spec.workers = o.workers;
  return spec;
}

int cmd_solve(const Options& o) {
  reginn::StudySpec spec = to_spec(o);
  if (o.deltas.size() != 1)
    throw reginn::ArgumentError("solve: give exactly one --delta");
  const std::uint64_t seed = o.seeds.empty() ? 1 : o.seeds.front();
  const reginn::SingleRun run = reginn::run_single(spec, o.deltas.front(), seed);
  std::printf("method,delta,delta_used,n_delta,t_total,err_s,err_0,stop_reason\n");
  std::printf("%s,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%s\n", o.method.c_str(), run.cell.delta,
              run.trace.delta_used, run.cell.n_delta, run.cell.t_total, run.cell.err_s,
              run.cell.err_0, reginn::to_string(run.cell.stop_reason).c_str());
  if (!run.trace_path.empty()) std::printf("trace: %s\n", run.trace_path.c_str());
  return run.cell.stop_reason == reginn::StopReason::Discrepancy ? 0 : 2;
}

int cmd_rate_study(const Options& o) {
  const reginn::StudySpec spec = to_spec(o);
  const reginn::RateStudyResult res = reginn::run_rate_study(spec);
  std::printf("delta");
  for (double r : spec.r_list) std::printf(",err_r=%g", r);
  std::printf("\n");
  for (std::size_t j = 0; j < res.delta.size(); ++j) {
    std::printf("%.3g", res.delta[j]);
    for (std::size_t i = 0; i < spec.r_list.size(); ++i)
      std::printf(",%.6g", res.err_geo[i][j]);
    std::printf("\n");
  }
  for (std::size_t i = 0; i < spec.r_list.size(); ++i) {
    const double theory = (spec.mu - spec.r_list[i]) / (spec.a + spec.mu);
    std::printf("fit r=%g: slope=%.4f theory=%.4f intercept=%.4f r2=%.5f\n", spec.r_list[i],
                res.fits[i].slope, theory, res.fits[i].intercept, res.fits[i].r2);
  }
  return 0;
}

int cmd_count_study(const Options& o) {
  const reginn::StudySpec spec = to_spec(o);
  const reginn::CountStudyResult res = reginn::run_count_study(spec);
  std::printf("delta,n_mean,t_geo\n");
  for (std::size_t j = 0; j < res.delta.size(); ++j)
    std::printf("%.3g,%.6g,%.6g\n", res.delta[j], res.n_mean[j], res.t_geo[j]);
  std::printf("fit n_delta ~ %.4f + %.4f*ln(1/delta), r2=%.5f\n", res.n_fit.intercept,
              res.n_fit.slope, res.n_fit.r2);
  std::printf("fit ln(t_total) ~ %.4f + %.4f*ln(1/delta), r2=%.5f\n", res.t_fit.intercept,
              res.t_fit.slope, res.t_fit.r2);
  return 0;
}

int cmd_filter_check(const Options& o) {
  const reginn::FilterKind kind = reginn::filter_kind_from_string(o.method);
  std::mt19937_64 rng(o.check_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> lambda_grid(65);
  for (std::size_t i = 0; i < lambda_grid.size(); ++i)
    lambda_grid[i] = static_cast<double>(i) / (lambda_grid.size() - 1.0);
  double worst = 0.0;
  bool pass = true;
  for (int i = 0; i < o.samples; ++i) {
    std::vector<double> t_seq;
    const int len = 2 + static_cast<int>(10 * unif(rng));
    for (int k = 0; k < len; ++k) {
      double t = reginn::is_discrete(kind) ? 1.0 + static_cast<int>(6 * unif(rng))
                                           : 0.05 + 8.0 * unif(rng);
      t_seq.push_back(t);
    }
    const double nu = (o.nu >= 0.0 && o.nu <= 1.0) ? o.nu : unif(rng);
    const std::size_t j = static_cast<std::size_t>(unif(rng) * (len - 1));
    const auto rep =
        reginn::check_filter_inequalities(kind, t_seq, nu, lambda_grid, j, t_seq.size());
    worst = std::max({worst, rep.g1_max_slack, rep.g2_max_slack, rep.g3_max_slack});
    pass = pass && rep.pass;
  }
  std::printf("%s: %d randomized sequences, worst slack %.3e -> %s\n", o.method.c_str(),
              o.samples, worst, pass ? "ok" : "VIOLATED");
  return pass ? 0 : 2;
}

int cmd_verify(const Options& o) {
  if (o.trace_file.empty()) throw reginn::ArgumentError("verify: give --trace <csv>");
  if (o.deltas.size() > 1) throw reginn::ArgumentError("verify: at most one --delta");
  std::ifstream is(o.trace_file);
  if (!is) throw reginn::ArgumentError("verify: cannot open " + o.trace_file);
  const std::vector<reginn::TraceRow> rows = reginn::read_trace_rows(is);

  const reginn::FilterKind kind = reginn::filter_kind_from_string(o.method);
  const double floor = reginn::t_floor(kind, o.eta);
  const double delta = o.deltas.empty() ? 0.0 : o.deltas.front();
  const bool has_err = !std::isnan(rows.front().err_s);

  bool floors_ok = true, monotone = true, residuals_ok = true, s_consistent = true;
  double s_expect = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool last = i + 1 == rows.size();
    if (std::abs(rows[i].s_n - s_expect) > 1e-9 * (1.0 + s_expect)) s_consistent = false;
    s_expect += rows[i].t_n;
    if ((!last || rows[i].t_n != 0.0) && rows[i].t_n < floor - 1e-9) floors_ok = false;
    if (!last && delta > 0.0 && rows[i].residual <= o.tau * delta) residuals_ok = false;
    if (has_err && i > 0 && rows[i].err_s > rows[i - 1].err_s * (1.0 + 1e-12)) monotone = false;
  }
  const bool reached = delta > 0.0 && rows.back().residual <= o.tau * delta;

  std::printf("rows: %zu\n", rows.size());
  std::printf("stopping-index floors (>= %.6g): %s\n", floor, floors_ok ? "ok" : "VIOLATED");
  std::printf("error monotone in the s-norm: %s\n",
              has_err ? (monotone ? "ok" : "VIOLATED") : "n/a (no reference columns)");
  std::printf("cumulative t consistent: %s\n", s_consistent ? "ok" : "VIOLATED");
  if (delta > 0.0) {
    std::printf("residuals above tau*delta before the stop: %s\n",
                residuals_ok ? "ok" : "VIOLATED");
    std::printf("discrepancy reached at the last row: %s\n", reached ? "yes" : "no");
  }
  const bool all = floors_ok && (!has_err || monotone) && residuals_ok && s_consistent;
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regularized Newton iterations in Hilbert scales: experiment driver"};
  app.require_subcommand(1);
  Options o;

  CLI::App* solve = app.add_subcommand("solve", "one reconstruction, writes a trace CSV");
  add_problem_flags(solve, o);

  CLI::App* rate = app.add_subcommand("rate-study", "error decay across a noise sweep");
  add_problem_flags(rate, o);

  CLI::App* count = app.add_subcommand("count-study", "iteration growth across a noise sweep");
  add_problem_flags(count, o);

  CLI::App* fcheck = app.add_subcommand("filter-check", "randomized filter inequality check");
  fcheck->add_option("--method", o.method, "scheme to check")
      ->check(CLI::IsMember({"landweber", "implicit", "asymptotic", "tikhonov"}))
      ->capture_default_str();
  fcheck->add_option("--nu", o.nu, "interpolation exponent, outside [0,1] samples randomly")
      ->capture_default_str();
  fcheck->add_option("--samples", o.samples, "number of random sequences")
      ->capture_default_str();
  fcheck->add_option("--seed", o.check_seed, "rng seed")->capture_default_str();
  fcheck->set_config("--config", "", "flat key=value file; command-line flags win");

  CLI::App* verify = app.add_subcommand("verify", "re-check invariants of a trace CSV");
  verify->add_option("--trace", o.trace_file, "trace CSV produced by solve")->required();
  verify->add_option("--method", o.method)->capture_default_str();
  verify->add_option("--eta", o.eta)->capture_default_str();
  verify->add_option("--tau", o.tau)->capture_default_str();
  verify->add_option("--delta", o.deltas,
                     "noise level in the trace's frame (delta_used reported by solve)");
  verify->set_config("--config", "", "flat key=value file; command-line flags win");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (solve->parsed()) return cmd_solve(o);
    if (rate->parsed()) return cmd_rate_study(o);
    if (count->parsed()) return cmd_count_study(o);
    if (fcheck->parsed()) return cmd_filter_check(o);
    if (verify->parsed()) return cmd_verify(o);
  } catch (const reginn::ArgumentError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 3;
}
