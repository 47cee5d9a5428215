#include <benchmark/benchmark.h>

#include <random>

#include "reginn/filters.hpp"
#include "reginn/inner.hpp"
#include "reginn/scale.hpp"

namespace {

void BM_FilterGain(benchmark::State& state) {
  const auto kind = static_cast<reginn::FilterKind>(state.range(0));
  double t = 7.0, acc = 0.0;
  for (auto _ : state) {
    for (int i = 0; i <= 256; ++i)
      acc += reginn::filter_g(kind, t, static_cast<double>(i) / 256.0);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_FilterGain)->DenseRange(0, 3);

void BM_ApplyPower(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const reginn::ScaleBasis basis = reginn::integer_spectrum_basis(n);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd raw(n);
  for (Eigen::Index i = 0; i < n; ++i) raw[i] = gauss(rng);
  const reginn::ScaleVector x = reginn::attach(basis, raw);
  for (auto _ : state) {
    auto y = reginn::apply_power(basis, -1.5, x);
    benchmark::DoNotOptimize(y.coeffs.data());
  }
}
BENCHMARK(BM_ApplyPower)->Arg(256)->Arg(1024);

void BM_InnerSolve(benchmark::State& state) {
  const auto kind = static_cast<reginn::FilterKind>(state.range(0));
  const Eigen::Index n = 256;
  const reginn::ScaleBasis basis = reginn::integer_spectrum_basis(n);
  const auto model = reginn::make_diagonal_linear_model(n, 1.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) b[i] = gauss(rng);

  reginn::InnerProblem p;
  p.model = model.get();
  p.basis = &basis;
  p.x = Eigen::VectorXd::Zero(n);
  p.rhs = 0.9 * b / b.norm();
  p.eta = 0.5;

  for (auto _ : state) {
    reginn::InnerResult r;
    switch (kind) {
      case reginn::FilterKind::Landweber: r = reginn::landweber_inner(p); break;
      case reginn::FilterKind::Implicit: r = reginn::implicit_inner(p); break;
      case reginn::FilterKind::Asymptotic: r = reginn::asymptotic_inner(p); break;
      case reginn::FilterKind::Tikhonov: r = reginn::tikhonov_inner(p); break;
    }
    benchmark::DoNotOptimize(r.t);
  }
}
BENCHMARK(BM_InnerSolve)->DenseRange(0, 3);

}  // namespace

BENCHMARK_MAIN();
