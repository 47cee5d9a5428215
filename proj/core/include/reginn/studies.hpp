#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "reginn/newton.hpp"

namespace reginn {

enum class ProblemKind { Diagonal, Hammerstein };

std::string to_string(ProblemKind p);
ProblemKind problem_kind_from_string(const std::string& name);

// One experiment family: a synthetic problem, a solver configuration, and a
// grid of noise levels crossed with seeds.
struct StudySpec {
  ProblemKind problem = ProblemKind::Diagonal;
  SolverConfig config;
  Eigen::Index n = 256;
  double a = 1.0;           // smoothing order of the forward map
  double beta_cubic = 0.1;  // nonlinearity strength (hammerstein only)
  double mu = 1.0;          // smoothness index of the initial error
  double omega_norm = 0.5;  // ||e0||_mu
  std::vector<double> r_list = {0.0};  // norms ||e||_r to report, r in [-a, s]
  std::vector<double> delta_list;      // strictly decreasing noise levels
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir;  // empty: keep results in memory only
  int workers = 0;      // 0 picks hardware concurrency
};

void validate(const StudySpec& spec);

// Half-decade grid 1e-1, 3e-2, ..., 1e-5, the default for sweep experiments.
std::vector<double> default_noise_grid();

// Fully assembled synthetic problem for one seed.
struct ProblemInstance {
  ScaleBasis basis;
  std::shared_ptr<ForwardModel> model;
  Eigen::VectorXd x_true;
  Eigen::VectorXd x0;
  Eigen::VectorXd y;  // exact data F(x_true)
};

ProblemInstance make_instance(const StudySpec& spec, std::uint64_t seed);

struct CellResult {
  double delta = 0.0;
  std::uint64_t seed = 0;
  int n_delta = 0;
  double t_total = 0.0;
  long long total_work = 0;
  double final_residual = 0.0;
  StopReason stop_reason = StopReason::MaxOuter;
  std::vector<double> err_r;  // final ||x - x_true||_r per entry of r_list
  double err_s = 0.0;
  double err_0 = 0.0;
};

struct FitLine {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least-squares line through (x_i, y_i); r2 is the coefficient of determination.
FitLine fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct RateStudyResult {
  std::vector<double> delta;
  // err_geo[i][j]: geometric mean over seeds of ||e||_{r_list[i]} at delta[j]
  std::vector<std::vector<double>> err_geo;
  std::vector<FitLine> fits;  // log err vs log delta, one per r
  std::vector<CellResult> cells;
};

struct CountStudyResult {
  std::vector<double> delta;
  std::vector<double> n_mean;   // mean outer count per noise level
  std::vector<double> t_geo;    // geometric mean of the accumulated inner parameter
  FitLine n_fit;                // n_delta vs ln(1/delta)
  FitLine t_fit;                // ln t_total vs ln(1/delta)
  std::vector<CellResult> cells;
};

// Decay of the reconstruction error along the noise grid. Throws StudyError
// if any cell fails to stop at the discrepancy criterion.
RateStudyResult run_rate_study(const StudySpec& spec);

// Growth of the outer iteration count and the accumulated inner parameter.
CountStudyResult run_count_study(const StudySpec& spec);

struct SingleRun {
  RunTrace trace;
  CellResult cell;
  std::string trace_path;  // artifact location when out_dir is set
};

// One (delta, seed) cell with the full per-iteration trace retained.
SingleRun run_single(const StudySpec& spec, double delta, std::uint64_t seed);

}  // namespace reginn
