#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace reginn {

// Densely defined self-adjoint operator L = diag(l_1 <= l_2 <= ...), l_1 > 0,
// in a fixed orthonormal basis. Fractional powers L^t generate the norm family
// ||x||_t = ||L^t x||; every vector in the family is a coefficient array tagged
// with the identity of the basis it lives in.
class ScaleBasis {
 public:
  ScaleBasis(Eigen::ArrayXd eigenvalues, std::string description);

  Eigen::Index dimension() const { return eigenvalues_.size(); }
  const Eigen::ArrayXd& eigenvalues() const { return eigenvalues_; }
  const std::string& description() const { return description_; }
  std::uint64_t id() const { return id_; }

  // gamma = 1/l_1, the constant in the embedding ||x||_q <= gamma^(r-q) ||x||_r.
  double gamma() const { return 1.0 / eigenvalues_[0]; }

  // Entrywise l_k^t.
  Eigen::ArrayXd powers(double t) const;

 private:
  Eigen::ArrayXd eigenvalues_;
  std::string description_;
  std::uint64_t id_;
};

// Coefficient vector tagged with the basis it belongs to.
struct ScaleVector {
  Eigen::VectorXd coeffs;
  std::uint64_t basis_id = 0;

  Eigen::Index size() const { return coeffs.size(); }
};

// The default spectrum for studies: l_k = k, k = 1..n.
ScaleBasis integer_spectrum_basis(Eigen::Index n);

// Wrap raw coefficients as a vector of `basis`; validates the length.
ScaleVector attach(const ScaleBasis& basis, Eigen::VectorXd coeffs);

// Throws StructuralError unless x belongs to `basis` and has its dimension.
void require_member(const ScaleBasis& basis, const ScaleVector& x);

// y = L^t x, same basis. apply_power(b, t, apply_power(b, u, x)) == L^(t+u) x.
ScaleVector apply_power(const ScaleBasis& basis, double t, const ScaleVector& x);

// ||x||_t = ||L^t x|| in the coefficient 2-norm.
double norm_t(const ScaleBasis& basis, double t, const ScaleVector& x);

struct InterpolationReport {
  double lhs = 0.0;  // ||x||_q
  double rhs = 0.0;  // ||x||_p^((r-q)/(r-p)) * ||x||_r^((q-p)/(r-p))
  bool holds = false;
};

// Direct check of the interpolation inequality for p < q < r.
InterpolationReport check_interpolation(const ScaleBasis& basis, const ScaleVector& x,
                                        double p, double q, double r);

}  // namespace reginn
