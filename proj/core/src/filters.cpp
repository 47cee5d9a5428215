#include "reginn/filters.hpp"

#include <cmath>
#include <limits>

#include "reginn/errors.hpp"

namespace reginn {

bool is_discrete(FilterKind kind) {
  return kind == FilterKind::Landweber || kind == FilterKind::Implicit;
}

const char* to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::Landweber:  return "landweber";
    case FilterKind::Implicit:   return "implicit";
    case FilterKind::Asymptotic: return "asymptotic";
    case FilterKind::Tikhonov:   return "tikhonov";
  }
  return "?";
}

FilterKind filter_kind_from_string(const std::string& name) {
  if (name == "landweber")  return FilterKind::Landweber;
  if (name == "implicit")   return FilterKind::Implicit;
  if (name == "asymptotic") return FilterKind::Asymptotic;
  if (name == "tikhonov")   return FilterKind::Tikhonov;
  throw ArgumentError("unknown method '" + name +
                      "' (expected landweber|implicit|asymptotic|tikhonov)");
}

namespace {

void check_g_args(double t, double lambda) {
  if (!(t > 0.0)) throw ArgumentError("filter: need t > 0");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ArgumentError("filter: need lambda in [0,1]");
}

}  // namespace

double filter_g(FilterKind kind, double t, double lambda) {
  check_g_args(t, lambda);
  switch (kind) {
    case FilterKind::Landweber: {
      // geometric sum through log1p/expm1: dodges the 1-(1-x) cancellation at
      // small lambda and the power's error amplification at large m
      const double m = std::floor(t);
      if (lambda == 0.0) return m;
      if (m == 0.0) return 0.0;
      if (lambda == 1.0) return 1.0;
      return -std::expm1(m * std::log1p(-lambda)) / lambda;
    }
    case FilterKind::Implicit: {
      const double m = std::floor(t);
      if (lambda == 0.0) return m;
      return -std::expm1(-m * std::log1p(lambda)) / lambda;
    }
    case FilterKind::Asymptotic: {
      const double x = t * lambda;
      if (std::abs(x) < 1e-6) return t * (1.0 - x / 2.0 + x * x / 6.0);
      return -std::expm1(-x) / lambda;
    }
    case FilterKind::Tikhonov:
      return 1.0 / (1.0 / t + lambda);
  }
  throw ArgumentError("filter_g: bad kind");
}

double filter_r(FilterKind kind, double t, double lambda) {
  check_g_args(t, lambda);
  switch (kind) {
    case FilterKind::Landweber: {
      // exp(m log1p(-lambda)) keeps lambda's low bits; pow(1 - lambda, m)
      // amplifies the rounding of 1 - lambda by the exponent
      const double m = std::floor(t);
      if (m == 0.0) return 1.0;
      return lambda == 1.0 ? 0.0 : std::exp(m * std::log1p(-lambda));
    }
    case FilterKind::Implicit:
      return std::exp(-std::floor(t) * std::log1p(lambda));
    case FilterKind::Asymptotic:
      return std::exp(-t * lambda);
    case FilterKind::Tikhonov:
      return 1.0 / (1.0 + t * lambda);
  }
  throw ArgumentError("filter_r: bad kind");
}

FilterInequalityReport check_filter_inequalities(FilterKind kind,
                                                 const std::vector<double>& t_seq,
                                                 double nu,
                                                 const std::vector<double>& lambda_grid,
                                                 std::size_t j, std::size_t n,
                                                 double tol) {
  if (!(nu >= 0.0 && nu <= 1.0)) throw ArgumentError("check_filter_inequalities: nu in [0,1]");
  if (!(j < n)) throw ArgumentError("check_filter_inequalities: need j < n");
  if (n > t_seq.size()) throw ArgumentError("check_filter_inequalities: n exceeds t_seq length");
  if (lambda_grid.empty()) throw ArgumentError("check_filter_inequalities: empty lambda grid");
  for (double t : t_seq) {
    if (!(t > 0.0)) throw ArgumentError("check_filter_inequalities: t_seq entries must be > 0");
    if (is_discrete(kind) && t != std::floor(t))
      throw ArgumentError("check_filter_inequalities: discrete kind needs integer t_seq");
  }

  // partial sums s_i = t_0 + ... + t_{i-1}
  std::vector<double> s(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) s[i + 1] = s[i] + t_seq[i];

  FilterInequalityReport rep;
  const double neg = -std::numeric_limits<double>::infinity();
  rep.g1_max_slack = rep.g2_max_slack = rep.g3_max_slack = neg;
  for (double lambda : lambda_grid) {
    const double lnu = std::pow(lambda, nu);  // 0^0 == 1 per IEEE pow

    // (g1): full residual product over k = j .. n-1
    double prod = 1.0;
    for (std::size_t k = j; k < n; ++k) prod *= filter_r(kind, t_seq[k], lambda);
    rep.g1_max_slack = std::max(rep.g1_max_slack,
                                lnu * prod - std::pow(s[n] - s[j], -nu));

    // (g2): one gain at position j, residuals after it
    double tail = 1.0;
    for (std::size_t k = j + 1; k < n; ++k) tail *= filter_r(kind, t_seq[k], lambda);
    rep.g2_max_slack = std::max(rep.g2_max_slack,
                                lnu * filter_g(kind, t_seq[j], lambda) * tail -
                                    t_seq[j] * std::pow(s[n] - s[j], -nu));

    // (g3): accumulated gains, telescoped from the end
    double sum = 0.0;
    double suffix = 1.0;  // prod_{k=i+1}^{n-1} r_{t_k}, built backwards
    for (std::size_t i = n; i-- > 0;) {
      sum += filter_g(kind, t_seq[i], lambda) * suffix;
      suffix *= filter_r(kind, t_seq[i], lambda);
    }
    rep.g3_max_slack = std::max(rep.g3_max_slack,
                                lnu * sum - std::pow(s[n], 1.0 - nu));
  }
  rep.pass = rep.g1_max_slack <= tol && rep.g2_max_slack <= tol && rep.g3_max_slack <= tol;
  return rep;
}

}  // namespace reginn
