#include "reginn/inner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include "reginn/errors.hpp"

namespace reginn {
namespace {

// Frozen derivative at the linearization point, counting applications.
struct Lin {
  const ForwardModel& f;
  const Eigen::VectorXd& x;
  long long count = 0;

  Eigen::VectorXd T(const Eigen::VectorXd& h) {
    ++count;
    return f.d_apply(x, h);
  }
  Eigen::VectorXd Tt(const Eigen::VectorXd& g) {
    ++count;
    return f.d_adjoint_apply(x, g);
  }
};

void check_problem(const InnerProblem& p) {
  if (!p.model || !p.basis) throw StructuralError("inner solver: null model or basis");
  if (p.model->domain_dim() != p.basis->dimension())
    throw StructuralError("inner solver: model/basis dimension mismatch");
  if (p.x.size() != p.model->domain_dim())
    throw StructuralError("inner solver: linearization point has wrong dimension");
  if (p.rhs.size() != p.model->range_dim())
    throw StructuralError("inner solver: rhs has wrong dimension");
  if (!(p.eta > 0.0 && p.eta < 1.0)) throw ArgumentError("inner solver: need eta in (0,1)");
  if (!(p.s >= 0.0)) throw ArgumentError("inner solver: need s >= 0");
  if (!(p.rhs.norm() > 0.0)) throw ArgumentError("inner solver: zero right-hand side");
}

// ---------------------------------------------------------------------------
// Spectral residual machinery, shared by the diagonal fast path and the dense
// oracle route. residual(t)^2 = sum_i r_t(lambda_i)^2 beta_i^2 + floor2.

struct SpectralSystem {
  Eigen::ArrayXd lambda;  // eigenvalues of A A* carried by the components
  Eigen::ArrayXd beta;    // projections of b on the corresponding directions
  double floor2 = 0.0;    // data energy invisible to the operator range
  double bnorm = 0.0;
  Eigen::ArrayXd diag_back;       // diagonal route: u = diag_back * g * beta
  const DenseSvd* svd = nullptr;  // dense route: u = lms * (V Sigma g beta)
  Eigen::ArrayXd lms;

  double residual(FilterKind kind, double t) const {
    double acc = floor2;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      const double r = filter_r(kind, t, lambda[i]);
      acc += r * r * beta[i] * beta[i];
    }
    return std::sqrt(acc);
  }

  double limit_residual() const {
    double acc = floor2;
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
      if (lambda[i] == 0.0) acc += beta[i] * beta[i];
    return std::sqrt(acc);
  }

  Eigen::VectorXd correction(FilterKind kind, double t) const {
    Eigen::ArrayXd g(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) g[i] = filter_g(kind, t, lambda[i]);
    if (svd) {
      const Eigen::Index r = lambda.size();
      Eigen::VectorXd coeff =
          (svd->sigma.head(r).array() * g * beta).matrix();
      return (lms * (svd->v.leftCols(r) * coeff).array()).matrix();
    }
    return (diag_back * g * beta).matrix();
  }
};

void check_spectrum_scaled(Eigen::ArrayXd& lambda) {
  const double mx = lambda.size() > 0 ? lambda.maxCoeff() : 0.0;
  if (mx > 1.0 + 1e-12)
    throw ArgumentError("inner solver: linearized operator norm exceeds 1; rescale the model");
  lambda = lambda.min(1.0);
}

SpectralSystem diagonal_system(const InnerProblem& p, const Eigen::ArrayXd& sigma) {
  SpectralSystem sys;
  sys.lms = p.basis->powers(-p.s);
  Eigen::ArrayXd alpha = sigma * sys.lms;
  sys.lambda = alpha.square();
  check_spectrum_scaled(sys.lambda);
  sys.beta = p.rhs.array();
  sys.floor2 = 0.0;
  sys.bnorm = p.rhs.norm();
  sys.diag_back = sys.lms * alpha;
  return sys;
}

SpectralSystem dense_system(const InnerProblem& p, const DenseSvd& svd) {
  if (svd.basis_id != p.basis->id())
    throw StructuralError("spectral inner: factorization built on a different basis");
  if (svd.s != p.s)
    throw ArgumentError("spectral inner: factorization built for a different s");
  SpectralSystem sys;
  sys.svd = &svd;
  sys.lms = p.basis->powers(-p.s);
  const Eigen::Index r = svd.rank;
  sys.lambda = svd.sigma.head(r).array().square();
  check_spectrum_scaled(sys.lambda);
  sys.beta = (svd.u.leftCols(r).transpose() * p.rhs).array();
  sys.bnorm = p.rhs.norm();
  sys.floor2 = std::max(0.0, sys.bnorm * sys.bnorm - sys.beta.matrix().squaredNorm());
  return sys;
}

// Smallest integer k >= 1 with residual(k) <= eta*||b||: exponential bracket,
// then integer bisection on the monotone sequence.
InnerResult discrete_spectral_search(const SpectralSystem& sys, FilterKind kind, double eta,
                                     long long k_max) {
  InnerResult out;
  const double target = eta * sys.bnorm;
  long long evals = 0;
  auto eval = [&](long long k) {
    const double r = sys.residual(kind, static_cast<double>(k));
    ++evals;
    out.t_history.push_back(static_cast<double>(k));
    out.residual_history.push_back(r);
    return r;
  };

  if (sys.limit_residual() >= target) {
    out.status = InnerStatus::Infeasible;
    out.u = Eigen::VectorXd::Zero(sys.lms.size());
    out.residual_norm = sys.bnorm;
    out.work = evals;
    return out;
  }

  long long lo = 0, hi = 1;
  double r_hi = eval(1);
  while (r_hi > target && hi < k_max) {
    lo = hi;
    hi = std::min(2 * hi, k_max);
    r_hi = eval(hi);
  }
  if (r_hi > target) {
    out.status = InnerStatus::Stalled;
    out.t = static_cast<double>(k_max);
    out.residual_norm = r_hi;
    out.u = sys.correction(kind, out.t);
    out.work = evals;
    return out;
  }
  while (hi - lo > 1) {
    const long long mid = lo + (hi - lo) / 2;
    if (eval(mid) > target) lo = mid; else hi = mid;
  }
  out.t = static_cast<double>(hi);
  out.residual_norm = sys.residual(kind, out.t);
  out.u = sys.correction(kind, out.t);
  out.work = evals;
  out.status = InnerStatus::Converged;
  return out;
}

struct CrossingOut {
  double t = 0.0;
  double res = 0.0;
  InnerStatus status = InnerStatus::Converged;
};

// Locate the eta-crossing of a continuous, nonincreasing residual curve:
// geometric bracketing in both directions from t = 1, then bisection to
// relative bracket width kTRelWidth. phi must record its own history.
CrossingOut continuous_crossing(const std::function<double(double)>& phi, double bnorm,
                                double eta, double t_max) {
  const double target = eta * bnorm;
  double t_hi = std::min(1.0, t_max);
  double r_hi = phi(t_hi);
  double t_lo = 0.0;

  if (r_hi > target) {
    double prev = r_hi;
    while (r_hi > target) {
      if (t_hi >= t_max) return {t_hi, r_hi, InnerStatus::Stalled};
      t_lo = t_hi;
      t_hi = std::min(2.0 * t_hi, t_max);
      r_hi = phi(t_hi);
      if (r_hi > target && prev - r_hi <= 1e-12 * bnorm)  // flat above the target
        return {t_hi, r_hi, InnerStatus::Stalled};
      prev = r_hi;
    }
  } else {
    double t = t_hi;
    bool bracketed = false;
    while (t > 1e-14) {
      t *= 0.5;
      const double r = phi(t);
      if (r > target) {
        t_lo = t;
        bracketed = true;
        break;
      }
      t_hi = t;
      r_hi = r;
    }
    if (!bracketed)
      throw NumericalError("inner solver: residual below target arbitrarily close to t = 0");
  }

  int guard = 0;
  while (t_hi - t_lo > kTRelWidth * t_hi && ++guard <= 200) {
    const double tm = 0.5 * (t_lo + t_hi);
    const double rm = phi(tm);
    if (rm > target) t_lo = tm;
    else { t_hi = tm; r_hi = rm; }
  }
  return {t_hi, r_hi, InnerStatus::Converged};
}

void check_band(const InnerResult& out, double eta, double bnorm) {
  if (out.status != InnerStatus::Converged) return;
  if (out.residual_norm > eta * bnorm * (1.0 + 1e-9) ||
      out.residual_norm < kEtaBandLower * eta * bnorm * (1.0 - 1e-9))
    throw NumericalError("inner solver: accepted residual escaped the tolerance band");
}

InnerResult continuous_spectral_search(const SpectralSystem& sys, FilterKind kind, double eta,
                                       double t_max) {
  InnerResult out;
  long long evals = 0;
  if (sys.limit_residual() >= eta * sys.bnorm) {
    out.status = InnerStatus::Infeasible;
    out.u = Eigen::VectorXd::Zero(sys.lms.size());
    out.residual_norm = sys.bnorm;
    return out;
  }
  auto phi = [&](double t) {
    const double r = sys.residual(kind, t);
    ++evals;
    out.t_history.push_back(t);
    out.residual_history.push_back(r);
    return r;
  };
  const CrossingOut c = continuous_crossing(phi, sys.bnorm, eta, t_max);
  out.t = c.t;
  out.residual_norm = c.res;
  out.status = c.status;
  out.u = sys.correction(kind, c.t);
  out.work = evals;
  check_band(out, eta, sys.bnorm);
  return out;
}

// ---------------------------------------------------------------------------
// Matrix-free plumbing.

// Solves (shift I + A* A) w = rhs by plain CG; w doubles as the warm start.
// The true residual is refreshed every 50 steps to keep the recursion honest.
long long cg_shifted(Lin& lin, const Eigen::ArrayXd& lms, double shift,
                     const Eigen::VectorXd& rhs, Eigen::VectorXd& w, double rel_tol,
                     long long max_iter) {
  auto op = [&](const Eigen::VectorXd& q) {
    Eigen::VectorXd aq = lin.T((lms * q.array()).matrix());
    return Eigen::VectorXd(shift * q + (lms * lin.Tt(aq).array()).matrix());
  };
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    w = Eigen::VectorXd::Zero(rhs.size());
    return 0;
  }
  if (w.size() != rhs.size()) w = Eigen::VectorXd::Zero(rhs.size());

  Eigen::VectorXd r = rhs - op(w);
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  const double target = rel_tol * rhs_norm;
  long long it = 0;
  while (std::sqrt(rr) > target) {
    if (++it > max_iter)
      throw NumericalError("inner linear solve: CG exceeded its iteration cap");
    Eigen::VectorXd ap = op(p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0))
      throw NumericalError("inner linear solve: CG breakdown, operator not positive definite");
    const double alpha = rr / pap;
    w += alpha * p;
    if (it % 50 == 0) r = rhs - op(w);
    else r -= alpha * ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return it;
}

constexpr double kCgTol = 1e-10;

long long cg_cap(Eigen::Index n) { return std::max<long long>(5000, 50 * n); }

const Eigen::ArrayXd* auto_diagonal(const InnerProblem& p) {
  if (p.path != InnerPath::Auto) return nullptr;
  return p.model->constant_diagonal_derivative();
}

}  // namespace

InnerResult landweber_inner(const InnerProblem& p, long long k_max) {
  check_problem(p);
  if (k_max < 1) throw ArgumentError("landweber inner: need k_max >= 1");
  if (const Eigen::ArrayXd* sigma = auto_diagonal(p))
    return discrete_spectral_search(diagonal_system(p, *sigma), FilterKind::Landweber, p.eta,
                                    k_max);
  Lin lin{*p.model, p.x};
  const Eigen::ArrayXd lm2s = p.basis->powers(-2.0 * p.s);
  const double bnorm = p.rhs.norm();
  const double target = p.eta * bnorm;

  InnerResult out;
  out.u = Eigen::VectorXd::Zero(p.model->domain_dim());
  Eigen::VectorXd z = p.rhs;
  out.t_history.push_back(0.0);
  out.residual_history.push_back(bnorm);

  for (long long k = 1; k <= k_max; ++k) {
    Eigen::VectorXd w = lin.Tt(z);
    out.u += (lm2s * w.array()).matrix();
    z = p.rhs - lin.T(out.u);
    const double res = z.norm();
    out.t_history.push_back(static_cast<double>(k));
    out.residual_history.push_back(res);
    if (res <= target) {
      out.t = static_cast<double>(k);
      out.residual_norm = res;
      out.work = lin.count;
      out.status = InnerStatus::Converged;
      return out;
    }
  }
  out.t = static_cast<double>(k_max);
  out.residual_norm = out.residual_history.back();
  out.work = lin.count;
  out.status = InnerStatus::Stalled;
  return out;
}

InnerResult implicit_inner(const InnerProblem& p, long long k_max) {
  check_problem(p);
  if (k_max < 1) throw ArgumentError("implicit inner: need k_max >= 1");
  if (const Eigen::ArrayXd* sigma = auto_diagonal(p))
    return discrete_spectral_search(diagonal_system(p, *sigma), FilterKind::Implicit, p.eta,
                                    k_max);
  if (p.path == InnerPath::Auto && p.model->domain_dim() <= 512 && p.model->range_dim() <= 512) {
    const DenseSvd svd = build_dense(*p.model, *p.basis, p.x, p.s);
    InnerResult out =
        discrete_spectral_search(dense_system(p, svd), FilterKind::Implicit, p.eta, k_max);
    out.work += p.model->domain_dim();
    return out;
  }

  Lin lin{*p.model, p.x};
  const Eigen::ArrayXd lms = p.basis->powers(-p.s);
  const double bnorm = p.rhs.norm();
  const double target = p.eta * bnorm;

  InnerResult out;
  out.u = Eigen::VectorXd::Zero(p.model->domain_dim());
  Eigen::VectorXd z = p.rhs;
  Eigen::VectorXd w;  // warm start carried across steps
  out.t_history.push_back(0.0);
  out.residual_history.push_back(bnorm);

  for (long long k = 1; k <= k_max; ++k) {
    Eigen::VectorXd rhs_w = (lms * lin.Tt(z).array()).matrix();
    cg_shifted(lin, lms, 1.0, rhs_w, w, kCgTol, cg_cap(p.basis->dimension()));
    out.u += (lms * w.array()).matrix();
    z = p.rhs - lin.T(out.u);
    const double res = z.norm();
    out.t_history.push_back(static_cast<double>(k));
    out.residual_history.push_back(res);
    if (res <= target) {
      out.t = static_cast<double>(k);
      out.residual_norm = res;
      out.work = lin.count;
      out.status = InnerStatus::Converged;
      return out;
    }
  }
  out.t = static_cast<double>(k_max);
  out.residual_norm = out.residual_history.back();
  out.work = lin.count;
  out.status = InnerStatus::Stalled;
  return out;
}

InnerResult tikhonov_inner(const InnerProblem& p, double t_max) {
  check_problem(p);
  if (!(t_max >= 1.0)) throw ArgumentError("tikhonov inner: need t_max >= 1");
  if (const Eigen::ArrayXd* sigma = auto_diagonal(p))
    return continuous_spectral_search(diagonal_system(p, *sigma), FilterKind::Tikhonov, p.eta,
                                      t_max);
  if (p.path == InnerPath::Auto && p.model->domain_dim() <= 512 && p.model->range_dim() <= 512) {
    // The shifted normal equations get stiff as t grows; at this size the
    // dense route is both faster and immune to that.
    const DenseSvd svd = build_dense(*p.model, *p.basis, p.x, p.s);
    InnerResult out =
        continuous_spectral_search(dense_system(p, svd), FilterKind::Tikhonov, p.eta, t_max);
    out.work += p.model->domain_dim();
    return out;
  }

  Lin lin{*p.model, p.x};
  const Eigen::ArrayXd lms = p.basis->powers(-p.s);
  const double bnorm = p.rhs.norm();
  const Eigen::VectorXd ab = (lms * lin.Tt(p.rhs).array()).matrix();

  InnerResult out;
  Eigen::VectorXd w;  // warm start shared across evaluations
  double best_res = std::numeric_limits<double>::infinity();
  double best_t = 0.0;
  Eigen::VectorXd best_w;
  auto phi = [&](double t) {
    cg_shifted(lin, lms, 1.0 / t, ab, w, kCgTol, cg_cap(p.basis->dimension()));
    const double res = (p.rhs - lin.T((lms * w.array()).matrix())).norm();
    out.t_history.push_back(t);
    out.residual_history.push_back(res);
    if (res < best_res) {
      best_res = res;
      best_t = t;
      best_w = w;
    }
    return res;
  };

  try {
    const CrossingOut c = continuous_crossing(phi, bnorm, p.eta, t_max);
    phi(c.t);  // leave w at the accepted parameter (warm start makes this cheap)
    out.t = c.t;
    out.residual_norm = out.residual_history.back();
    out.status = c.status;
    out.u = (lms * w.array()).matrix();
  } catch (const NumericalError&) {
    // t grew past what the linear solver resolves: report a stall with the
    // best iterate instead of aborting the outer iteration.
    if (best_w.size() == 0) throw;
    out.t = best_t;
    out.residual_norm = best_res;
    out.status = InnerStatus::Stalled;
    out.u = (lms * best_w.array()).matrix();
  }
  out.work = lin.count;
  check_band(out, p.eta, bnorm);
  return out;
}

namespace {

InnerResult asymptotic_integrator(const InnerProblem& p, double t_max) {
  namespace ode = boost::numeric::odeint;
  Lin lin{*p.model, p.x};
  const Eigen::ArrayXd lms = p.basis->powers(-p.s);
  const double bnorm = p.rhs.norm();
  const double target = p.eta * bnorm;

  // s-shifted flow: w' = A*(b - A w), u = L^-s w
  auto flow = [&](const Eigen::VectorXd& wv, Eigen::VectorXd& dwdt, double) {
    Eigen::VectorXd aw = lin.T((lms * wv.array()).matrix());
    dwdt = (lms * lin.Tt(p.rhs - aw).array()).matrix();
  };
  auto residual_at = [&](const Eigen::VectorXd& wv) {
    return (p.rhs - lin.T((lms * wv.array()).matrix())).norm();
  };

  InnerResult out;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p.model->domain_dim());
  out.t_history.push_back(0.0);
  out.residual_history.push_back(bnorm);

  auto stepper = ode::make_dense_output(1e-8, 1e-8, ode::runge_kutta_dopri5<Eigen::VectorXd>());
  stepper.initialize(w, 0.0, 0.1);

  double prev_t = 0.0;
  while (stepper.current_time() < t_max) {
    stepper.do_step(flow);
    const double t_cur = stepper.current_time();
    const double res = residual_at(stepper.current_state());
    out.t_history.push_back(t_cur);
    out.residual_history.push_back(res);
    if (res <= target) {
      // crossing inside [prev_t, t_cur]: bisect on the dense output
      double lo = prev_t, hi = t_cur, r_hi = res;
      Eigen::VectorXd wi(w.size());
      int guard = 0;
      while (hi - lo > kTRelWidth * hi && ++guard <= 200) {
        const double tm = 0.5 * (lo + hi);
        stepper.calc_state(tm, wi);
        const double rm = residual_at(wi);
        out.t_history.push_back(tm);
        out.residual_history.push_back(rm);
        if (rm > target) lo = tm;
        else { hi = tm; r_hi = rm; }
      }
      stepper.calc_state(hi, wi);
      out.t = hi;
      out.residual_norm = r_hi;
      out.u = (lms * wi.array()).matrix();
      out.work = lin.count;
      out.status = InnerStatus::Converged;
      check_band(out, p.eta, bnorm);
      return out;
    }
    prev_t = t_cur;
  }
  out.t = stepper.current_time();
  out.residual_norm = out.residual_history.back();
  out.u = (lms * stepper.current_state().array()).matrix();
  out.work = lin.count;
  out.status = InnerStatus::Stalled;
  return out;
}

}  // namespace

InnerResult asymptotic_inner(const InnerProblem& p, double t_max, AsymptoticPath path) {
  check_problem(p);
  if (!(t_max >= 1.0)) throw ArgumentError("asymptotic inner: need t_max >= 1");
  // The time integrator is the matrix-free realization of this scheme.
  if (path == AsymptoticPath::Integrator || p.path == InnerPath::MatrixFree)
    return asymptotic_integrator(p, t_max);

  if (const Eigen::ArrayXd* sigma = auto_diagonal(p))
    return continuous_spectral_search(diagonal_system(p, *sigma), FilterKind::Asymptotic,
                                      p.eta, t_max);
  if (p.model->domain_dim() <= 512 && p.model->range_dim() <= 512) {
    const DenseSvd svd = build_dense(*p.model, *p.basis, p.x, p.s);
    InnerResult out = continuous_spectral_search(dense_system(p, svd), FilterKind::Asymptotic,
                                                 p.eta, t_max);
    out.work += p.model->domain_dim();  // materialization cost
    return out;
  }
  return asymptotic_integrator(p, t_max);  // too large for the dense route
}

InnerResult spectral_inner(const InnerProblem& p, FilterKind kind, const DenseSvd& svd,
                           long long k_max, double t_max) {
  check_problem(p);
  const SpectralSystem sys = dense_system(p, svd);
  if (is_discrete(kind)) return discrete_spectral_search(sys, kind, p.eta, k_max);
  return continuous_spectral_search(sys, kind, p.eta, t_max);
}

}  // namespace reginn
