#include "reginn/forward_model.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "reginn/errors.hpp"

namespace reginn {

DiagonalLinearModel::DiagonalLinearModel(Eigen::ArrayXd sigma) : sigma_(std::move(sigma)) {
  if (sigma_.size() == 0) throw ArgumentError("diagonal model: empty spectrum");
  if ((sigma_ < 0.0).any()) throw ArgumentError("diagonal model: negative singular value");
}

Eigen::VectorXd DiagonalLinearModel::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != sigma_.size()) throw StructuralError("diagonal model: dimension mismatch");
  return (sigma_ * x.array()).matrix();
}

Eigen::VectorXd DiagonalLinearModel::d_apply(const Eigen::VectorXd&,
                                             const Eigen::VectorXd& h) const {
  if (h.size() != sigma_.size()) throw StructuralError("diagonal model: dimension mismatch");
  return (sigma_ * h.array()).matrix();
}

Eigen::VectorXd DiagonalLinearModel::d_adjoint_apply(const Eigen::VectorXd&,
                                                     const Eigen::VectorXd& g) const {
  if (g.size() != sigma_.size()) throw StructuralError("diagonal model: dimension mismatch");
  return (sigma_ * g.array()).matrix();
}

namespace {

// Orthonormal DCT-II matrix: row j, column k = c_j cos(pi (2k+1) j / (2n)).
Eigen::MatrixXd orthonormal_dct(Eigen::Index n) {
  Eigen::MatrixXd p(n, n);
  const double pi = std::numbers::pi;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double cj = (j == 0) ? std::sqrt(1.0 / static_cast<double>(n))
                               : std::sqrt(2.0 / static_cast<double>(n));
    for (Eigen::Index k = 0; k < n; ++k)
      p(j, k) = cj * std::cos(pi * (2.0 * k + 1.0) * j / (2.0 * n));
  }
  return p;
}

}  // namespace

HammersteinModel::HammersteinModel(Eigen::Index n, double beta_cubic) : beta_(beta_cubic) {
  if (n < 1) throw ArgumentError("hammerstein model: need n >= 1");
  if (!(beta_cubic >= 0.0)) throw ArgumentError("hammerstein model: need beta_cubic >= 0");
  b_ = Eigen::ArrayXd::LinSpaced(n, 1.0, static_cast<double>(n)).inverse();
  p_ = orthonormal_dct(n);
}

double HammersteinModel::domain_ball_radius() const {
  if (beta_ == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(3.0 * beta_);
}

Eigen::VectorXd HammersteinModel::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != b_.size()) throw StructuralError("hammerstein model: dimension mismatch");
  Eigen::ArrayXd v = (p_ * x).array();            // nodal values
  Eigen::VectorXd phi = (v + beta_ * v.cube()).matrix();
  return (b_ * (p_.transpose() * phi).array()).matrix();
}

Eigen::VectorXd HammersteinModel::d_apply(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& h) const {
  if (x.size() != b_.size() || h.size() != b_.size())
    throw StructuralError("hammerstein model: dimension mismatch");
  Eigen::ArrayXd v = (p_ * x).array();
  Eigen::ArrayXd dphi = 1.0 + 3.0 * beta_ * v.square();
  Eigen::VectorXd w = (dphi * (p_ * h).array()).matrix();
  return (b_ * (p_.transpose() * w).array()).matrix();
}

Eigen::VectorXd HammersteinModel::d_adjoint_apply(const Eigen::VectorXd& x,
                                                  const Eigen::VectorXd& g) const {
  if (x.size() != b_.size() || g.size() != b_.size())
    throw StructuralError("hammerstein model: dimension mismatch");
  Eigen::ArrayXd v = (p_ * x).array();
  Eigen::ArrayXd dphi = 1.0 + 3.0 * beta_ * v.square();
  Eigen::VectorXd w = (dphi * (p_ * (b_ * g.array()).matrix()).array()).matrix();
  return p_.transpose() * w;
}

std::shared_ptr<DiagonalLinearModel> make_diagonal_linear_model(Eigen::Index n, double a) {
  if (n < 1) throw ArgumentError("diagonal model: need n >= 1");
  if (!(a >= 0.0)) throw ArgumentError("diagonal model: need a >= 0");
  Eigen::ArrayXd sigma =
      Eigen::ArrayXd::LinSpaced(n, 1.0, static_cast<double>(n)).pow(-a);
  return std::make_shared<DiagonalLinearModel>(std::move(sigma));
}

std::shared_ptr<HammersteinModel> make_hammerstein_model(Eigen::Index n, double beta_cubic) {
  return std::make_shared<HammersteinModel>(n, beta_cubic);
}

NoisyData make_noisy_data(const Eigen::VectorXd& y, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw ArgumentError("make_noisy_data: need delta >= 0");
  NoisyData data;
  data.delta = delta;
  data.seed = seed;
  if (delta == 0.0) {
    data.y_delta = y;
    return data;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd dir(y.size());
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = gauss(rng);
    norm = dir.norm();
  } while (norm == 0.0);
  data.y_delta = y + (delta / norm) * dir;
  return data;
}

std::pair<ScaleVector, ScaleVector> make_source_solution(const ForwardModel& model,
                                                         const ScaleBasis& basis,
                                                         const SourceSpec& spec, double s,
                                                         double mu_max) {
  if (model.domain_dim() != basis.dimension())
    throw StructuralError("make_source_solution: model/basis dimension mismatch");
  if (!(spec.mu > s))
    throw ArgumentError("make_source_solution: need mu > s");
  if (!(spec.mu <= mu_max))
    throw ArgumentError("make_source_solution: mu above the admissible window");
  if (!(spec.omega_norm > 0.0))
    throw ArgumentError("make_source_solution: need omega_norm > 0");

  const Eigen::Index n = basis.dimension();

  // Fixed smooth exact solution, coefficient norm 1/2.
  Eigen::VectorXd truth(n);
  for (Eigen::Index k = 0; k < n; ++k)
    truth[k] = std::pow(static_cast<double>(k + 1), -2.0);
  truth *= 0.5 / truth.norm();

  // Error with the prescribed decay; seeded signs decorrelate realizations.
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution coin(0.5);
  Eigen::VectorXd e0(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double mag = std::pow(static_cast<double>(k + 1), -spec.mu - 0.55);
    e0[k] = coin(rng) ? mag : -mag;
  }
  ScaleVector e0v = attach(basis, std::move(e0));
  const double nmu = norm_t(basis, spec.mu, e0v);
  e0v.coeffs *= spec.omega_norm / nmu;

  ScaleVector x_true = attach(basis, std::move(truth));
  ScaleVector x0 = attach(basis, x_true.coeffs + e0v.coeffs);
  return {std::move(x_true), std::move(x0)};
}

NormEstimate estimate_scaled_norm(const ForwardModel& model, const ScaleBasis& basis,
                                  double s, const Eigen::VectorXd& x, int max_iter,
                                  std::uint64_t seed) {
  if (model.domain_dim() != basis.dimension())
    throw StructuralError("estimate_scaled_norm: model/basis dimension mismatch");
  if (x.size() != model.domain_dim())
    throw StructuralError("estimate_scaled_norm: point has wrong dimension");
  if (!(s >= 0.0)) throw ArgumentError("estimate_scaled_norm: need s >= 0");

  const Eigen::ArrayXd lms = basis.powers(-s);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(model.domain_dim());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
  v.normalize();

  NormEstimate est;
  double lambda_prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    // w = (A* A) v with A = F'(x) L^-s
    Eigen::VectorXd av = model.d_apply(x, (lms * v.array()).matrix());
    Eigen::VectorXd w = (lms * model.d_adjoint_apply(x, av).array()).matrix();
    const double lambda = w.norm();
    est.iterations = it;
    if (lambda == 0.0) {  // x in the kernel-only start direction; treat as zero norm
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    v = w / lambda;
    est.value = std::sqrt(lambda);
    if (it > 1 && std::abs(lambda - lambda_prev) <= 1e-8 * lambda) {
      est.converged = true;
      return est;
    }
    lambda_prev = lambda;
  }
  est.converged = false;
  return est;
}

namespace {

class ScaledModel : public ForwardModel {
 public:
  ScaledModel(std::shared_ptr<const ForwardModel> inner, double c)
      : inner_(std::move(inner)), c_(c) {
    if (const Eigen::ArrayXd* d = inner_->constant_diagonal_derivative())
      scaled_diag_ = c_ * (*d);
  }

  Eigen::Index domain_dim() const override { return inner_->domain_dim(); }
  Eigen::Index range_dim() const override { return inner_->range_dim(); }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const override {
    return c_ * inner_->evaluate(x);
  }
  Eigen::VectorXd d_apply(const Eigen::VectorXd& x, const Eigen::VectorXd& h) const override {
    return c_ * inner_->d_apply(x, h);
  }
  Eigen::VectorXd d_adjoint_apply(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& g) const override {
    return c_ * inner_->d_adjoint_apply(x, g);
  }
  double domain_ball_radius() const override { return inner_->domain_ball_radius(); }
  const Eigen::ArrayXd* constant_diagonal_derivative() const override {
    return scaled_diag_.size() > 0 ? &scaled_diag_ : nullptr;
  }

 private:
  std::shared_ptr<const ForwardModel> inner_;
  double c_;
  Eigen::ArrayXd scaled_diag_;
};

}  // namespace

RescaledModel rescale_model(std::shared_ptr<const ForwardModel> model,
                            const ScaleBasis& basis, double s, double theta,
                            const Eigen::VectorXd* at) {
  if (!model) throw ArgumentError("rescale_model: null model");
  if (!(theta > 0.0 && theta < 1.0)) throw ArgumentError("rescale_model: need theta in (0,1)");
  Eigen::VectorXd x0 = at ? *at : Eigen::VectorXd::Zero(model->domain_dim());
  NormEstimate est = estimate_scaled_norm(*model, basis, s, x0);
  if (!(est.value > 0.0))
    throw NumericalError("rescale_model: zero derivative norm at the scaling point");
  RescaledModel out;
  out.factor = theta / est.value;
  out.model = std::make_shared<ScaledModel>(std::move(model), out.factor);
  return out;
}

}  // namespace reginn
