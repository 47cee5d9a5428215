#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "reginn/filters.hpp"
#include "reginn/forward_model.hpp"
#include "reginn/inner.hpp"
#include "reginn/scale.hpp"

namespace reginn {

enum class StopReason { Discrepancy, MaxOuter, InnerStall, Divergence };

std::string to_string(StopReason r);

struct SolverConfig {
  FilterKind kind = FilterKind::Landweber;
  double tau = 2.5;   // discrepancy multiplier, > 2
  double eta = 0.85;  // inner tolerance, in (0,1); tau*eta > 2 unless relaxed below
  double s = 0.0;     // smoothing exponent of the preconditioning scale
  int max_outer = 200;
  bool enforce_tau_eta = true;
  bool auto_rescale = true;  // scale the model so the derivative norm at x0 is theta
  double theta = 0.9;
  long long k_max = 100000;          // cap for the discrete inner schemes
  double t_max_asymptotic = 1e6;     // cap for the flow parameter
  double t_max_tikhonov = 1e12;      // cap for the penalty parameter
  InnerPath path = InnerPath::Auto;
  AsymptoticPath asymptotic_path = AsymptoticPath::Spectral;
  // Norm exponents for the diagnostic error columns; NaN leaves them blank.
  double trace_mu = std::numeric_limits<double>::quiet_NaN();
  double trace_a = std::numeric_limits<double>::quiet_NaN();
};

void validate(const SolverConfig& cfg);

struct TraceRow {
  int n = 0;
  double residual = 0.0;     // ||y_delta - F(x_n)|| in the solver frame
  double t_n = 0.0;          // accepted inner stopping index (0 on the final row)
  double s_n = 0.0;          // sum of t_j over j < n
  long long inner_work = 0;  // operator applications spent by the inner scheme
  double err_s = std::numeric_limits<double>::quiet_NaN();
  double err_mu = std::numeric_limits<double>::quiet_NaN();
  double err_minus_a = std::numeric_limits<double>::quiet_NaN();
  double err_0 = std::numeric_limits<double>::quiet_NaN();
};

struct RunTrace {
  std::vector<TraceRow> rows;  // n = 0 .. n_delta, last row is the stop state
  StopReason stop_reason = StopReason::MaxOuter;
  Eigen::VectorXd x_final;
  int n_delta = 0;        // Newton updates actually applied
  double t_total = 0.0;   // s_{n_delta}
  double final_residual = 0.0;
  long long total_work = 0;
  double rescale_factor = 1.0;  // data/model scaling applied by the driver
  double delta_used = 0.0;      // noise level in the solver frame
};

// Regularized Newton iteration: linearize, correct with the configured inner
// scheme until the inner residual drops below eta*||b||, repeat until the
// nonlinear residual drops below tau*delta. x_true, when given, fills the
// diagnostic error columns and arms the divergence guard.
RunTrace solve(const ForwardModel& model, const ScaleBasis& basis,
               const Eigen::VectorXd& y_delta, double delta, const Eigen::VectorXd& x0,
               const SolverConfig& cfg, const Eigen::VectorXd* x_true = nullptr);

struct TraceChecks {
  bool has_errors = false;     // err_s column was populated
  bool err_s_monotone = true;  // nonincreasing along accepted steps
  double energy_ratio = std::numeric_limits<double>::quiet_NaN();  // sum t_n res_n^2 / ||e0||_s^2
  bool floors_ok = true;       // each accepted t_n respects the scheme floor
  double min_t = std::numeric_limits<double>::infinity();
  double residual_contraction = 0.0;  // max over accepted steps of res_{n+1}/res_n
  bool contraction_below_one = true;
  bool residuals_consistent = true;  // > tau*delta before stopping, <= at a discrepancy stop
};

// e0_norm_s feeds the energy ratio; NaN falls back to the err_s column.
TraceChecks verify_trace(const RunTrace& trace, FilterKind kind, double eta, double tau,
                         double delta,
                         double e0_norm_s = std::numeric_limits<double>::quiet_NaN());

struct ResidualBounds {
  bool pre_stop_above = true;  // residual_n > tau*delta for every n before the stop
  bool stop_below = true;      // final residual <= tau*delta on a discrepancy stop
  double max_backward_ratio = 0.0;  // max residual_n / residual_{n+1} (reported, not asserted)
  bool pass = true;
};

ResidualBounds residual_bounds_check(const RunTrace& trace, double delta, double tau);

// Floor the accepted stopping index cannot undercut for a given scheme.
double t_floor(FilterKind kind, double eta);

void write_trace_csv(std::ostream& os, const RunTrace& trace);
std::vector<TraceRow> read_trace_rows(std::istream& is);

}  // namespace reginn
