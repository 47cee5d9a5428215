#include "reginn/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "reginn/errors.hpp"

namespace reginn {

DenseSvd build_dense(const ForwardModel& model, const ScaleBasis& basis,
                     const Eigen::VectorXd& x, double s) {
  const Eigen::Index n = model.domain_dim();
  const Eigen::Index m = model.range_dim();
  if (n != basis.dimension())
    throw StructuralError("build_dense: model/basis dimension mismatch");
  if (x.size() != n) throw StructuralError("build_dense: point has wrong dimension");
  if (n > 512 || m > 512)
    throw ArgumentError("build_dense: dimension above 512; dense oracle refused");

  const Eigen::ArrayXd lms = basis.powers(-s);
  DenseSvd out;
  out.s = s;
  out.basis_id = basis.id();
  out.a.resize(m, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    e[k] = lms[k];
    out.a.col(k) = model.d_apply(x, e);
    e[k] = 0.0;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(out.a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.u = svd.matrixU();
  out.sigma = svd.singularValues();
  out.v = svd.matrixV();

  const double cut = out.sigma.size() > 0
                         ? out.sigma[0] * static_cast<double>(std::max(m, n)) * 1e-15
                         : 0.0;
  out.rank = 0;
  for (Eigen::Index i = 0; i < out.sigma.size(); ++i)
    if (out.sigma[i] > cut) ++out.rank;
  return out;
}

NormEquivalenceReport check_norm_equivalence(const DenseSvd& svd, const ScaleBasis& basis,
                                             double a, double s, double nu, int samples,
                                             double m, double big_m, double tol,
                                             std::uint64_t seed) {
  if (svd.basis_id != basis.id())
    throw StructuralError("check_norm_equivalence: svd built on a different basis");
  if (samples < 1) throw ArgumentError("check_norm_equivalence: need samples >= 1");
  if (!(m > 0.0 && big_m >= m))
    throw ArgumentError("check_norm_equivalence: need 0 < m <= M");

  const double lo = std::min(std::pow(m, nu), std::pow(big_m, nu));
  const double hi = std::max(std::pow(m, nu), std::pow(big_m, nu));
  const Eigen::Index r = svd.rank;
  if (r == 0) throw ArgumentError("check_norm_equivalence: zero-rank operator");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  NormEquivalenceReport rep;
  rep.samples = samples;
  for (int i = 0; i < samples; ++i) {
    // h in the row space: coefficients on the leading right singular vectors
    Eigen::VectorXd c(r);
    for (Eigen::Index k = 0; k < r; ++k) c[k] = gauss(rng);
    Eigen::VectorXd h = svd.v.leftCols(r) * c;

    // ||(A*A)^(nu/2) h|| evaluated spectrally
    double mid2 = 0.0;
    for (Eigen::Index k = 0; k < r; ++k)
      mid2 += std::pow(svd.sigma[k], 2.0 * nu) * c[k] * c[k];
    const double mid = std::sqrt(mid2);

    const double ref = norm_t(basis, -nu * (a + s), attach(basis, h));
    rep.max_lower_violation = std::max(rep.max_lower_violation, (lo * ref - mid) / mid);
    rep.max_upper_violation = std::max(rep.max_upper_violation, (mid - hi * ref) / mid);
  }
  rep.pass = rep.max_lower_violation <= tol && rep.max_upper_violation <= tol;
  return rep;
}

TaylorProbeReport taylor_remainder_probe(const ForwardModel& model, const ScaleBasis& basis,
                                         const Eigen::VectorXd& center, double radius,
                                         double s, double a, double b_exp, double beta_exp,
                                         int samples, std::uint64_t seed) {
  if (center.size() != model.domain_dim())
    throw StructuralError("taylor_remainder_probe: center has wrong dimension");
  if (!(radius > 0.0)) throw ArgumentError("taylor_remainder_probe: need radius > 0");
  if (!(beta_exp > 0.0 && beta_exp <= 1.0))
    throw ArgumentError("taylor_remainder_probe: need beta_exp in (0,1]");
  if (samples < 1) throw ArgumentError("taylor_remainder_probe: need samples >= 1");

  const double shape = std::pow(basis.gamma(), s * beta_exp + b_exp - a) / (1.0 + beta_exp);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto sample_point = [&]() {
    Eigen::VectorXd d(center.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = gauss(rng);
    d *= radius * unif(rng) / d.norm();
    return Eigen::VectorXd(center + d);
  };

  TaylorProbeReport rep;
  rep.samples = samples;
  for (int i = 0; i < samples; ++i) {
    Eigen::VectorXd x = sample_point();
    Eigen::VectorXd z = sample_point();
    Eigen::VectorXd diff = x - z;
    if (diff.norm() == 0.0) continue;
    const double rem =
        (model.evaluate(x) - model.evaluate(z) - model.d_apply(z, diff)).norm();
    ScaleVector dv = attach(basis, diff);
    const double denom =
        shape * std::pow(norm_t(basis, s, dv), beta_exp) * norm_t(basis, -a, dv);
    if (denom == 0.0) continue;
    rep.max_ratio = std::max(rep.max_ratio, rem / denom);
  }
  rep.finite = std::isfinite(rep.max_ratio);
  return rep;
}

}  // namespace reginn
