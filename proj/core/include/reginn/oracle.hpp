#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "reginn/forward_model.hpp"
#include "reginn/scale.hpp"

namespace reginn {

// Dense factorization of the shifted derivative A = F'(x) L^-s at a point,
// for desk-scale cross-checks of the matrix-free solvers.
struct DenseSvd {
  Eigen::MatrixXd a;      // materialized operator, range_dim x domain_dim
  Eigen::MatrixXd u;      // left singular vectors (thin)
  Eigen::VectorXd sigma;  // singular values, descending
  Eigen::MatrixXd v;      // right singular vectors (thin)
  Eigen::Index rank = 0;  // numerical rank (relative threshold on sigma)
  double s = 0.0;
  std::uint64_t basis_id = 0;
};

// Materializes A column by column through d_apply and factorizes it.
// Refuses dimensions above 512: the dense route is a reference tool only.
DenseSvd build_dense(const ForwardModel& model, const ScaleBasis& basis,
                     const Eigen::VectorXd& x, double s);

struct NormEquivalenceReport {
  // Relative margins of min/max(m,M)^nu ||h||_{-nu(a+s)} around ||(A*A)^(nu/2) h||;
  // positive violation values mean the two-sided bound failed by that much.
  double max_lower_violation = 0.0;
  double max_upper_violation = 0.0;
  int samples = 0;
  bool pass = false;
};

// Samples h in the row space of A and checks the norm-equivalence sandwich
// between the spectral power norm and the scale norm of index -nu(a+s).
// m and M are the two-sided derivative constants (equal for the diagonal model:
// the scaling factor).
NormEquivalenceReport check_norm_equivalence(const DenseSvd& svd, const ScaleBasis& basis,
                                             double a, double s, double nu, int samples,
                                             double m = 1.0, double big_m = 1.0,
                                             double tol = 1e-9, std::uint64_t seed = 777);

struct TaylorProbeReport {
  double max_ratio = 0.0;  // empirical K0 estimate
  int samples = 0;
  bool finite = false;
};

// Ratio of the Taylor remainder ||F(x)-F(z)-F'(z)(x-z)|| to the bound shape
// (1+beta_exp)^-1 gamma^(s beta_exp + b_exp - a) ||x-z||_s^beta_exp ||x-z||_{-a},
// maximized over sampled pairs in the ball of the given radius around `center`.
// Zero (up to roundoff) for linear models.
TaylorProbeReport taylor_remainder_probe(const ForwardModel& model, const ScaleBasis& basis,
                                         const Eigen::VectorXd& center, double radius,
                                         double s, double a, double b_exp, double beta_exp,
                                         int samples = 100, std::uint64_t seed = 99);

}  // namespace reginn
