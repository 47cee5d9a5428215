#include "reginn/newton.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>

#include "reginn/errors.hpp"

namespace reginn {
namespace {

constexpr double kMonotoneSlack = 1e-12;  // relative, for the error decay check
constexpr double kFloorSlack = 1e-9;      // absolute, for the stopping-index floors

InnerResult run_inner(const ForwardModel& model, const ScaleBasis& basis,
                      const Eigen::VectorXd& x, const Eigen::VectorXd& rhs,
                      const SolverConfig& cfg) {
  InnerProblem p;
  p.model = &model;
  p.basis = &basis;
  p.x = x;
  p.rhs = rhs;
  p.s = cfg.s;
  p.eta = cfg.eta;
  p.path = cfg.path;
  switch (cfg.kind) {
    case FilterKind::Landweber: return landweber_inner(p, cfg.k_max);
    case FilterKind::Implicit: return implicit_inner(p, cfg.k_max);
    case FilterKind::Asymptotic:
      return asymptotic_inner(p, cfg.t_max_asymptotic, cfg.asymptotic_path);
    case FilterKind::Tikhonov: return tikhonov_inner(p, cfg.t_max_tikhonov);
  }
  throw StructuralError("newton driver: unknown inner scheme");
}

double scaled_norm_or_nan(const ScaleBasis& basis, double t, const Eigen::VectorXd& e) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  return norm_t(basis, t, attach(basis, e));
}

}  // namespace

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::Discrepancy: return "DISCREPANCY";
    case StopReason::MaxOuter: return "MAX_OUTER";
    case StopReason::InnerStall: return "INNER_STALL";
    case StopReason::Divergence: return "DIVERGENCE";
  }
  return "UNKNOWN";
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.tau > 2.0)) throw ArgumentError("newton driver: need tau > 2");
  if (!(cfg.eta > 0.0 && cfg.eta < 1.0)) throw ArgumentError("newton driver: need eta in (0,1)");
  if (cfg.enforce_tau_eta && !(cfg.tau * cfg.eta > 2.0))
    throw ArgumentError("newton driver: need tau*eta > 2 (set enforce_tau_eta=false to relax)");
  if (!(cfg.s >= 0.0)) throw ArgumentError("newton driver: need s >= 0");
  if (cfg.max_outer < 1) throw ArgumentError("newton driver: need max_outer >= 1");
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0))
    throw ArgumentError("newton driver: need theta in (0,1)");
  if (cfg.k_max < 1) throw ArgumentError("newton driver: need k_max >= 1");
  if (!(cfg.t_max_asymptotic >= 1.0) || !(cfg.t_max_tikhonov >= 1.0))
    throw ArgumentError("newton driver: need inner parameter caps >= 1");
}

RunTrace solve(const ForwardModel& model, const ScaleBasis& basis,
               const Eigen::VectorXd& y_delta, double delta, const Eigen::VectorXd& x0,
               const SolverConfig& cfg, const Eigen::VectorXd* x_true) {
  validate(cfg);
  if (!(delta >= 0.0)) throw ArgumentError("newton driver: need delta >= 0");
  if (x0.size() != model.domain_dim() || basis.dimension() != model.domain_dim())
    throw StructuralError("newton driver: model/basis/start dimension mismatch");
  if (y_delta.size() != model.range_dim())
    throw StructuralError("newton driver: data has wrong dimension");
  if (x_true && x_true->size() != model.domain_dim())
    throw StructuralError("newton driver: reference solution has wrong dimension");

  // Bring the problem into the frame where the scaled derivative norm is
  // theta < 1; data and noise level scale along with the operator.
  std::shared_ptr<const ForwardModel> work_model(&model, [](const ForwardModel*) {});
  double factor = 1.0;
  if (cfg.auto_rescale) {
    RescaledModel scaled = rescale_model(work_model, basis, cfg.s, cfg.theta, &x0);
    work_model = scaled.model;
    factor = scaled.factor;
  } else {
    const NormEstimate est = estimate_scaled_norm(model, basis, cfg.s, x0);
    if (est.value > 1.0 + 1e-12)
      throw ArgumentError("newton driver: scaled derivative norm exceeds 1 and rescaling is off");
  }
  const Eigen::VectorXd y = factor * y_delta;
  const double d = factor * delta;

  RunTrace trace;
  trace.rescale_factor = factor;
  trace.delta_used = d;

  Eigen::VectorXd x = x0;
  double s_cum = 0.0;
  double prev_err_s = std::numeric_limits<double>::infinity();

  for (int n = 0;; ++n) {
    const Eigen::VectorXd z = y - work_model->evaluate(x);
    const double res = z.norm();

    TraceRow row;
    row.n = n;
    row.residual = res;
    row.s_n = s_cum;
    if (x_true) {
      const Eigen::VectorXd e = x - *x_true;
      row.err_s = scaled_norm_or_nan(basis, cfg.s, e);
      row.err_mu = scaled_norm_or_nan(basis, cfg.trace_mu, e);
      row.err_minus_a = std::isnan(cfg.trace_a)
                            ? std::numeric_limits<double>::quiet_NaN()
                            : scaled_norm_or_nan(basis, -cfg.trace_a, e);
      row.err_0 = e.norm();
    }
    trace.rows.push_back(row);

    if (x_true && n >= 1 && row.err_s > prev_err_s * (1.0 + 1e-9)) {
      trace.stop_reason = StopReason::Divergence;
      break;
    }
    if (x_true) prev_err_s = row.err_s;

    if (res <= cfg.tau * d) {
      trace.stop_reason = StopReason::Discrepancy;
      break;
    }
    if (n == cfg.max_outer) {
      trace.stop_reason = StopReason::MaxOuter;
      break;
    }

    const InnerResult inner = run_inner(*work_model, basis, x, z, cfg);
    trace.total_work += inner.work;
    if (inner.status != InnerStatus::Converged) {
      trace.rows.back().inner_work = inner.work;  // expended, though not accepted
      trace.stop_reason = StopReason::InnerStall;
      break;
    }
    trace.rows.back().t_n = inner.t;
    trace.rows.back().inner_work = inner.work;
    x += inner.u;
    s_cum += inner.t;
  }

  trace.x_final = x;
  trace.n_delta = trace.rows.back().n;
  trace.t_total = s_cum;
  trace.final_residual = trace.rows.back().residual;
  return trace;
}

double t_floor(FilterKind kind, double eta) {
  switch (kind) {
    case FilterKind::Landweber:
    case FilterKind::Implicit: return 1.0;
    case FilterKind::Asymptotic: return std::log(1.0 / eta);
    case FilterKind::Tikhonov: return 1.0 / eta - 1.0;
  }
  throw StructuralError("t_floor: unknown inner scheme");
}

TraceChecks verify_trace(const RunTrace& trace, FilterKind kind, double eta, double tau,
                         double delta, double e0_norm_s) {
  TraceChecks out;
  if (trace.rows.empty()) throw ArgumentError("verify_trace: empty trace");
  out.has_errors = !std::isnan(trace.rows.front().err_s);
  if (std::isnan(e0_norm_s) && out.has_errors) e0_norm_s = trace.rows.front().err_s;

  const double floor = t_floor(kind, eta);
  double energy = 0.0;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const TraceRow& r = trace.rows[i];
    const bool last = i + 1 == trace.rows.size();
    if (!last || r.t_n != 0.0) {
      if (r.t_n < floor - kFloorSlack) out.floors_ok = false;
      out.min_t = std::min(out.min_t, r.t_n);
      energy += r.t_n * r.residual * r.residual;
    }
    if (!last && r.residual <= tau * delta) out.residuals_consistent = false;
    if (last && trace.stop_reason == StopReason::Discrepancy && r.residual > tau * delta)
      out.residuals_consistent = false;
    if (i > 0) {
      const double prev = trace.rows[i - 1].residual;
      if (prev > 0.0)
        out.residual_contraction = std::max(out.residual_contraction, r.residual / prev);
      if (out.has_errors && r.err_s > trace.rows[i - 1].err_s * (1.0 + kMonotoneSlack))
        out.err_s_monotone = false;
    }
  }
  if (!std::isnan(e0_norm_s) && e0_norm_s > 0.0) out.energy_ratio = energy / (e0_norm_s * e0_norm_s);
  out.contraction_below_one = out.residual_contraction < 1.0;
  return out;
}

ResidualBounds residual_bounds_check(const RunTrace& trace, double delta, double tau) {
  ResidualBounds out;
  if (trace.rows.empty()) throw ArgumentError("residual_bounds_check: empty trace");
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const TraceRow& r = trace.rows[i];
    const bool last = i + 1 == trace.rows.size();
    if (!last && r.residual <= tau * delta) out.pre_stop_above = false;
    if (last && trace.stop_reason == StopReason::Discrepancy && r.residual > tau * delta)
      out.stop_below = false;
    if (i > 0 && r.residual > 0.0)
      out.max_backward_ratio =
          std::max(out.max_backward_ratio, trace.rows[i - 1].residual / r.residual);
  }
  out.pass = out.pre_stop_above && out.stop_below;
  return out;
}

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << "n,residual,t_n,s_n,inner_work,err_s,err_mu,err_minus_a,err_0\n";
  char buf[512];
  for (const TraceRow& r : trace.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%lld,%.17g,%.17g,%.17g,%.17g\n",
                  r.n, r.residual, r.t_n, r.s_n, static_cast<long long>(r.inner_work),
                  r.err_s, r.err_mu, r.err_minus_a, r.err_0);
    os << buf;
  }
}

std::vector<TraceRow> read_trace_rows(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ArgumentError("trace csv: empty stream");
  if (line.rfind("n,residual,t_n,s_n,inner_work", 0) != 0)
    throw ArgumentError("trace csv: missing or unrecognized header");
  std::vector<TraceRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    // strtod-based split: istreams refuse the nan fields %g emits
    std::vector<double> f;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t next = line.find(',', pos);
      if (next == std::string::npos) next = line.size();
      const std::string tok = line.substr(pos, next - pos);
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str()) throw ArgumentError("trace csv: malformed field '" + tok + "'");
      f.push_back(v);
      pos = next + 1;
    }
    if (f.size() != 9) throw ArgumentError("trace csv: expected 9 columns");
    TraceRow r;
    r.n = static_cast<int>(f[0]);
    r.residual = f[1];
    r.t_n = f[2];
    r.s_n = f[3];
    r.inner_work = static_cast<long long>(f[4]);
    r.err_s = f[5];
    r.err_mu = f[6];
    r.err_minus_a = f[7];
    r.err_0 = f[8];
    rows.push_back(r);
  }
  if (rows.empty()) throw ArgumentError("trace csv: no data rows");
  return rows;
}

}  // namespace reginn
