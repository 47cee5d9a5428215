#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <memory>
#include <utility>

#include "reginn/scale.hpp"

namespace reginn {

// Nonlinear operator F between the coefficient space of a ScaleBasis and a
// Euclidean data space, with a Frechet derivative available as matrix-free
// forward/adjoint applications frozen at a point.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;

  virtual Eigen::Index domain_dim() const = 0;
  virtual Eigen::Index range_dim() const = 0;

  virtual Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const = 0;

  // h |-> F'(x) h
  virtual Eigen::VectorXd d_apply(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& h) const = 0;

  // g |-> F'(x)* g
  virtual Eigen::VectorXd d_adjoint_apply(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& g) const = 0;

  // Radius of the ball (coefficient 2-norm, centered at 0) on which the
  // model's derivative bounds are guaranteed. Unbounded for linear models.
  virtual double domain_ball_radius() const {
    return std::numeric_limits<double>::infinity();
  }

  // When F'(x) = diag(sigma) independent of x, the entries; nullptr otherwise.
  // Inner solvers with path Auto use this for exact O(n) per-step solves.
  virtual const Eigen::ArrayXd* constant_diagonal_derivative() const { return nullptr; }
};

// F x = diag(sigma) x with sigma_k = k^-a: an a-times smoothing multiplication
// operator, ||F h|| = ||h||_{-a} exactly in the l_k = k basis.
class DiagonalLinearModel : public ForwardModel {
 public:
  explicit DiagonalLinearModel(Eigen::ArrayXd sigma);

  Eigen::Index domain_dim() const override { return sigma_.size(); }
  Eigen::Index range_dim() const override { return sigma_.size(); }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd d_apply(const Eigen::VectorXd& x, const Eigen::VectorXd& h) const override;
  Eigen::VectorXd d_adjoint_apply(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const override;
  const Eigen::ArrayXd* constant_diagonal_derivative() const override { return &sigma_; }

  const Eigen::ArrayXd& singular_values() const { return sigma_; }

 private:
  Eigen::ArrayXd sigma_;
};

// F = B(Phi(x)) with Phi(v) = v + beta v^3 applied pointwise in an orthonormal
// nodal frame and B the diagonal 1-smoothing operator. On the ball of radius
// 1/sqrt(3 beta) the nodal derivative Phi' stays in [1, 2].
class HammersteinModel : public ForwardModel {
 public:
  HammersteinModel(Eigen::Index n, double beta_cubic);

  Eigen::Index domain_dim() const override { return b_.size(); }
  Eigen::Index range_dim() const override { return b_.size(); }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd d_apply(const Eigen::VectorXd& x, const Eigen::VectorXd& h) const override;
  Eigen::VectorXd d_adjoint_apply(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const override;
  double domain_ball_radius() const override;

  double beta_cubic() const { return beta_; }
  // coefficient -> nodal orthonormal transform (for tests)
  const Eigen::MatrixXd& nodal_transform() const { return p_; }

 private:
  double beta_;
  Eigen::ArrayXd b_;   // smoothing weights k^-1
  Eigen::MatrixXd p_;  // orthonormal, rows are nodal functionals
};

std::shared_ptr<DiagonalLinearModel> make_diagonal_linear_model(Eigen::Index n, double a);
std::shared_ptr<HammersteinModel> make_hammerstein_model(Eigen::Index n, double beta_cubic);

// Data vector with a perturbation of exactly the prescribed norm:
// ||y_delta - y|| = delta (seeded pseudo-random unit direction).
struct NoisyData {
  Eigen::VectorXd y_delta;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

NoisyData make_noisy_data(const Eigen::VectorXd& y, double delta, std::uint64_t seed);

// Prescribed-smoothness initial error: e0 has coefficients sign_k k^(-mu-1/2-0.05)
// normalized so that ||e0||_mu = omega_norm, placing e0 on the boundary of the
// smoothness class X_mu (marginally inside, by the 0.05 tail reserve).
struct SourceSpec {
  double mu = 1.0;
  double omega_norm = 0.5;
  std::uint64_t seed = 0;
};

// Returns (x_true, x0 = x_true + e0). x_true is a fixed smooth profile of
// coefficient norm 1/2; only e0 carries the smoothness index. Requires
// s < mu <= mu_max.
std::pair<ScaleVector, ScaleVector> make_source_solution(
    const ForwardModel& model, const ScaleBasis& basis, const SourceSpec& spec,
    double s, double mu_max = std::numeric_limits<double>::infinity());

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Power iteration for || F'(x) L^-s || (top singular value of the shifted
// derivative). Caps at max_iter and flags non-convergence.
NormEstimate estimate_scaled_norm(const ForwardModel& model, const ScaleBasis& basis,
                                  double s, const Eigen::VectorXd& x,
                                  int max_iter = 200, std::uint64_t seed = 12345);

struct RescaledModel {
  std::shared_ptr<const ForwardModel> model;
  double factor = 1.0;  // callers scale data and noise level by the same factor
};

// Multiplies F by theta / ||F'(at) L^-s|| so the scaled derivative has
// estimated norm theta < 1 at the given point (origin when at == nullptr).
RescaledModel rescale_model(std::shared_ptr<const ForwardModel> model,
                            const ScaleBasis& basis, double s, double theta,
                            const Eigen::VectorXd* at = nullptr);

}  // namespace reginn
