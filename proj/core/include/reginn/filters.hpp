#pragma once

#include <string>
#include <vector>

namespace reginn {

// The four inner regularization schemes, identified by their spectral filters.
enum class FilterKind { Landweber, Implicit, Asymptotic, Tikhonov };

// Landweber and the implicit iteration advance in whole steps; the
// asymptotic flow and Tikhonov admit any real parameter t > 0.
bool is_discrete(FilterKind kind);

const char* to_string(FilterKind kind);
FilterKind filter_kind_from_string(const std::string& name);

// Gain g_t(lambda) on the spectral interval lambda in [0, 1]:
//   Landweber   sum_{j<floor(t)} (1-lambda)^j
//   Implicit    (1 - (1+lambda)^-floor(t)) / lambda
//   Asymptotic  (1 - exp(-t lambda)) / lambda
//   Tikhonov    1 / (1/t + lambda)
// Small-lambda evaluation switches to cancellation-free forms.
double filter_g(FilterKind kind, double t, double lambda);

// Residual factor r_t(lambda) = 1 - lambda g_t(lambda), in [0, 1].
double filter_r(FilterKind kind, double t, double lambda);

struct FilterInequalityReport {
  // Largest observed lhs - rhs for each of the three product bounds; a
  // positive slack is a violation.
  double g1_max_slack = 0.0;
  double g2_max_slack = 0.0;
  double g3_max_slack = 0.0;
  bool pass = false;
};

// Checks, on the given spectral grid, the three bounds that drive the
// convergence analysis. With s_n = sum_{k<n} t_k and 0 <= nu <= 1:
//   (g1)  lambda^nu prod_{k=j}^{n-1} r_{t_k}(lambda)            <= (s_n - s_j)^-nu
//   (g2)  lambda^nu g_{t_j}(lambda) prod_{k=j+1}^{n-1} r_{t_k}  <= t_j (s_n - s_j)^-nu
//   (g3)  lambda^nu sum_{i<n} g_{t_i}(lambda) prod_{k=i+1}^{n-1} r_{t_k} <= s_n^(1-nu)
// Discrete kinds require integer entries in t_seq.
FilterInequalityReport check_filter_inequalities(FilterKind kind,
                                                 const std::vector<double>& t_seq,
                                                 double nu,
                                                 const std::vector<double>& lambda_grid,
                                                 std::size_t j, std::size_t n,
                                                 double tol = 1e-10);

}  // namespace reginn
