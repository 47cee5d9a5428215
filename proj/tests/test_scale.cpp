#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "reginn/errors.hpp"
#include "reginn/scale.hpp"

using namespace reginn;

TEST_SUITE("scale") {

TEST_CASE("integer spectrum basis") {
  ScaleBasis b = integer_spectrum_basis(5);
  CHECK(b.dimension() == 5);
  for (int k = 0; k < 5; ++k) CHECK(b.eigenvalues()[k] == doctest::Approx(k + 1.0));
  CHECK(b.gamma() == doctest::Approx(1.0));

  ScaleBasis shifted(Eigen::ArrayXd::LinSpaced(4, 2.0, 5.0), "shifted");
  CHECK(shifted.gamma() == doctest::Approx(0.5));
  CHECK(shifted.id() != b.id());
}

TEST_CASE("basis construction rejects bad spectra") {
  Eigen::ArrayXd neg(2);
  neg << 1.0, -1.0;
  CHECK_THROWS_AS(ScaleBasis(neg, "bad"), ArgumentError);
  Eigen::ArrayXd unsorted(3);
  unsorted << 1.0, 3.0, 2.0;
  CHECK_THROWS_AS(ScaleBasis(unsorted, "bad"), ArgumentError);
  CHECK_THROWS_AS(ScaleBasis(Eigen::ArrayXd(0), "bad"), ArgumentError);
  CHECK_THROWS_AS(integer_spectrum_basis(0), ArgumentError);
}

TEST_CASE("attach and membership") {
  ScaleBasis b = integer_spectrum_basis(3);
  CHECK_THROWS_AS(attach(b, Eigen::VectorXd::Ones(4)), StructuralError);

  ScaleBasis other = integer_spectrum_basis(3);
  ScaleVector x = attach(other, Eigen::VectorXd::Ones(3));
  CHECK_THROWS_AS(require_member(b, x), StructuralError);
  CHECK_NOTHROW(require_member(other, x));
}

TEST_CASE("power application and norms") {
  ScaleBasis b = integer_spectrum_basis(4);
  Eigen::VectorXd v(4);
  v << 1.0, 1.0, 1.0, 1.0;
  ScaleVector x = attach(b, v);

  ScaleVector y = apply_power(b, 1.0, x);
  for (int k = 0; k < 4; ++k) CHECK(y.coeffs[k] == doctest::Approx(k + 1.0));

  CHECK(norm_t(b, 0.0, x) == doctest::Approx(2.0));
  CHECK(norm_t(b, 1.0, x) == doctest::Approx(std::sqrt(1.0 + 4.0 + 9.0 + 16.0)));
  CHECK(norm_t(b, -1.0, x) ==
        doctest::Approx(std::sqrt(1.0 + 0.25 + 1.0 / 9.0 + 1.0 / 16.0)));

  // semigroup: L^t L^u = L^(t+u)
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double t = unif(rng), u = unif(rng);
    Eigen::VectorXd w(4);
    for (int k = 0; k < 4; ++k) w[k] = unif(rng);
    ScaleVector z = attach(b, w);
    ScaleVector lhs = apply_power(b, t, apply_power(b, u, z));
    ScaleVector rhs = apply_power(b, t + u, z);
    CHECK((lhs.coeffs - rhs.coeffs).norm() <= 1e-12 * (1.0 + rhs.coeffs.norm()));
  }
}

TEST_CASE("embedding constant") {
  // ||x||_q <= gamma^(r-q) ||x||_r for q <= r
  ScaleBasis b(Eigen::ArrayXd::LinSpaced(6, 0.5, 3.0), "halfstart");
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd w(6);
    for (int k = 0; k < 6; ++k) w[k] = gauss(rng);
    ScaleVector x = attach(b, w);
    std::uniform_real_distribution<double> unif(-1.5, 1.5);
    double q = unif(rng), r = unif(rng);
    if (q > r) std::swap(q, r);
    CHECK(norm_t(b, q, x) <=
          std::pow(b.gamma(), r - q) * norm_t(b, r, x) * (1.0 + 1e-12));
  }
}

TEST_CASE("interpolation inequality, fixed example") {
  Eigen::ArrayXd sp(2);
  sp << 1.0, 4.0;
  ScaleBasis b(sp, "two-level");
  Eigen::VectorXd v(2);
  v << 1.0, 1.0;
  InterpolationReport rep = check_interpolation(b, attach(b, v), -1.0, 0.0, 1.0);
  CHECK(rep.lhs == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  // ||x||_{-1} = sqrt(1 + 1/16) = sqrt(17)/4, ||x||_1 = sqrt(17); product of the
  // square roots is sqrt(17)/2
  CHECK(rep.rhs == doctest::Approx(2.0615528128088303).epsilon(1e-14));
  CHECK(rep.holds);
}

TEST_CASE("interpolation inequality, randomized") {
  ScaleBasis b = integer_spectrum_basis(32);
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd w(32);
    for (int k = 0; k < 32; ++k) w[k] = gauss(rng);
    double e[3] = {unif(rng), unif(rng), unif(rng)};
    std::sort(e, e + 3);
    if (e[1] - e[0] < 1e-3 || e[2] - e[1] < 1e-3) continue;
    InterpolationReport rep = check_interpolation(b, attach(b, w), e[0], e[1], e[2]);
    CHECK(rep.holds);
    CHECK(rep.lhs <= rep.rhs * (1.0 + 1e-12));
  }
  CHECK_THROWS_AS(
      check_interpolation(b, attach(b, Eigen::VectorXd::Ones(32)), 1.0, 0.0, 2.0),
      ArgumentError);
}

}  // TEST_SUITE
