#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "bsq/hyperbolic.hpp"
#include "bsq/lindstedt.hpp"
#include "bsq/newton.hpp"

using namespace bsq;

namespace {

const double kMu = 1.0 / (8 * std::numbers::pi * std::numbers::pi);

lindstedt::Seed seed(const models::Model& m, int n) {
  return lindstedt::assemble_seed(m, lindstedt::build_series(m, 3, {1.0}), 1e-2, n, n);
}

void BM_Product(benchmark::State& st) {
  auto m = models::make_model(models::ModelKind::Scalar, kMu);
  auto K = seed(*m, static_cast<int>(st.range(0))).K;
  auto u = K.component(0);
  for (auto _ : st) benchmark::DoNotOptimize(fourier::product(u, u));
}
BENCHMARK(BM_Product)->Arg(8)->Arg(16)->Arg(32);

void BM_VectorField(benchmark::State& st) {
  auto m = models::make_model(models::ModelKind::System, kMu);
  auto K = seed(*m, static_cast<int>(st.range(0))).K;
  for (auto _ : st) benchmark::DoNotOptimize(models::apply_vectorfield(*m, K));
}
BENCHMARK(BM_VectorField)->Arg(8)->Arg(16);

void BM_Splitting(benchmark::State& st) {
  auto m = models::make_model(models::ModelKind::Scalar, kMu);
  const int n = static_cast<int>(st.range(0));
  auto s = seed(*m, n);
  for (auto _ : st) benchmark::DoNotOptimize(hyperbolic::compute_splitting(*m, s.K, s.omega[0], n));
  st.SetLabel("Ktheta = Kx");
}
BENCHMARK(BM_Splitting)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_DuhamelSolve(benchmark::State& st) {
  auto m = models::make_model(models::ModelKind::Scalar, kMu);
  auto s = seed(*m, 8);
  auto sp = hyperbolic::compute_splitting(*m, s.K, s.omega[0], 8);
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(sp.grid.size(), sp.dim());
  for (int n = 0; n < sp.grid.size(); ++n) F(n, 2) = std::cos(2 * std::numbers::pi * sp.grid.theta(n));
  F = hyperbolic::apply_projection(sp, hyperbolic::BundleKind::Stable, F);
  for (auto _ : st) benchmark::DoNotOptimize(hyperbolic::solve_stable(sp, F));
}
BENCHMARK(BM_DuhamelSolve)->Unit(benchmark::kMillisecond);

void BM_NewtonStep(benchmark::State& st) {
  auto m = models::make_model(models::ModelKind::Scalar, kMu);
  const int n = static_cast<int>(st.range(0));
  auto s = seed(*m, n);
  auto state = newton::initial_state(*m, s.K, s.omega);
  newton::NewtonOptions opt;
  opt.precheck = false;
  for (auto _ : st) benchmark::DoNotOptimize(newton::newton_step(*m, state, opt));
}
BENCHMARK(BM_NewtonStep)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
