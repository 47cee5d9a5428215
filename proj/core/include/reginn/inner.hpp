#pragma once

#include <Eigen/Core>
#include <vector>

#include "reginn/filters.hpp"
#include "reginn/forward_model.hpp"
#include "reginn/oracle.hpp"
#include "reginn/scale.hpp"

namespace reginn {

enum class InnerStatus {
  Converged,   // residual driven to eta * ||b|| (discrete: smallest such step)
  Stalled,     // iteration/parameter cap hit first; u carries the best iterate
  Infeasible,  // residual floor of the frozen linearization is >= eta * ||b||
};

enum class InnerPath {
  Auto,        // exact diagonal per-step solves when the model offers them
  MatrixFree,  // force the general operator-application route
};

enum class AsymptoticPath {
  Spectral,    // crossing solved on the exact spectral residual formula
  Integrator,  // embedded RK45 flow, oracle-free
};

// One frozen linearization: minimize over u the residual of T u = b with
// T = F'(x), regularized in the norm of index s.
struct InnerProblem {
  const ForwardModel* model = nullptr;
  const ScaleBasis* basis = nullptr;
  Eigen::VectorXd x;    // linearization point
  Eigen::VectorXd rhs;  // b = y_delta - F(x), must be nonzero
  double s = 0.0;
  double eta = 0.5;     // inner tolerance, in (0, 1)
  InnerPath path = InnerPath::Auto;
};

struct InnerResult {
  Eigen::VectorXd u;           // correction, coefficient representation
  double t = 0.0;              // stopping step count / flow time / parameter
  double residual_norm = 0.0;  // ||b - T u|| at t
  long long work = 0;          // derivative applications (spectral: residual evals)
  std::vector<double> t_history;        // evaluation points, in evaluation order
  std::vector<double> residual_history; // matching residual norms
  InnerStatus status = InnerStatus::Converged;
};

// Continuous kinds accept a t whose residual lies in [kEtaBandLower*eta, eta]*||b||.
// The bracket is refined to relative width kTRelWidth, so accepted residuals sit
// essentially at eta*||b|| rather than anywhere in the band.
inline constexpr double kEtaBandLower = 0.95;
inline constexpr double kTRelWidth = 1e-10;

// u_k = u_{k-1} + L^-2s T* (b - T u_{k-1}), stopped at the smallest k with
// ||b - T u_k|| <= eta ||b||.
InnerResult landweber_inner(const InnerProblem& p, long long k_max = 100000);

// u_k = u_{k-1} + (L^2s + T* T)^-1 T* (b - T u_{k-1}); the per-step system is
// solved in the s-shifted variable where it reads (I + A* A) w = A* z and has
// condition below 1 + ||A||^2, by CG to relative tolerance 1e-10.
InnerResult implicit_inner(const InnerProblem& p, long long k_max = 100000);

// u' = L^-2s T* (b - T u), u(0) = 0, run to the residual crossing. The
// spectral path bisects the exact formula ||r_t(A A*) b||; the integrator path
// advances an embedded Dormand-Prince 4/5 pair at tolerance 1e-8 and refines
// the crossing on its dense output.
InnerResult asymptotic_inner(const InnerProblem& p, double t_max = 1e6,
                             AsymptoticPath path = AsymptoticPath::Spectral);

// u(t) = (t^-1 L^2s + T* T)^-1 T* b with t located by geometric bracketing and
// bisection. Each residual evaluation is one SPD solve, warm-started from the
// previous evaluation. CG blow-up during the upward bracket (t beyond what the
// linear solver resolves) degrades to Stalled with the best iterate.
InnerResult tikhonov_inner(const InnerProblem& p, double t_max = 1e12);

// Reference route: identical stopping semantics evaluated on a dense
// factorization of A = F'(x) L^-s. Cross-checks the matrix-free solvers.
InnerResult spectral_inner(const InnerProblem& p, FilterKind kind, const DenseSvd& svd,
                           long long k_max = 100000, double t_max = 1e12);

}  // namespace reginn
