#include <cmath>
#include <numbers>
#include <random>

#include "bsq/center.hpp"
#include "bsq/error.hpp"
#include "bsq/lindstedt.hpp"
#include "doctest.h"

using namespace bsq;
using models::ModelKind;
using cd = std::complex<double>;

namespace {

constexpr double pi = std::numbers::pi;
const double kMu = 1.0 / (8 * pi * pi);

struct Setup {
  std::unique_ptr<models::Model> m;
  lindstedt::Seed s;
  hyperbolic::SplittingData sp;
  center::CenterFrame f;
};

Setup setup(ModelKind kind, double eps) {
  Setup u;
  u.m = models::make_model(kind, kMu);
  u.s = lindstedt::assemble_seed(*u.m, lindstedt::build_series(*u.m, 3, {1.0}), eps, 8, 8);
  u.sp = hyperbolic::compute_splitting(*u.m, u.s.K, u.s.omega[0], 8);
  u.f = center::build_center_frame(*u.m, u.s.K, u.sp);
  return u;
}

// real trigonometric polynomial sampled on the grid
Eigen::MatrixXcd trig(const grid::ThetaGrid& g, int kmax, unsigned seed, bool zero_avg) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(g.size(), 1);
  for (int k = zero_avg ? 1 : 0; k <= kmax; ++k) {
    double a = nd(rng) * std::exp(-k), b = nd(rng) * std::exp(-k);
    for (int n = 0; n < g.size(); ++n) v(n, 0) += a * std::cos(2 * pi * k * g.theta(n)) + b * std::sin(2 * pi * k * g.theta(n));
  }
  return v;
}

}  // namespace

TEST_CASE("Diophantine constant") {
  const double w = 1 / std::sqrt(2.0);
  auto r = center::diophantine_estimate({w}, 0.0, 6);
  CHECK(r.kappa_hat == doctest::Approx(1 / w));
  auto r2 = center::diophantine_estimate({w}, 1.0, 6);
  // (|k w| |k|)^{-1} is largest at k = 1
  CHECK(r2.kappa_hat == doctest::Approx(1 / w));
  CHECK_THROWS_AS(center::diophantine_estimate({1.0, 1.0}, 0.0, 3), bsq::Error);
  // golden mean pair: the worst small divisor below |k| = 8 comes from a Fibonacci pair
  const double g = (1 + std::sqrt(5.0)) / 2;
  auto r3 = center::diophantine_estimate({1.0, g}, 0.0, 8);
  double worst = 0;
  for (int a = -8; a <= 8; ++a)
    for (int b = -8; b <= 8; ++b)
      if ((a || b) && std::abs(a) + std::abs(b) <= 8) worst = std::max(worst, 1 / std::abs(a + b * g));
  CHECK(r3.kappa_hat == doctest::Approx(worst));
}

TEST_CASE("cohomology equation") {
  fourier::TorusMap h(1, 1, 3, 0);
  h.set1(0, 1, 0, 0.5);
  h.set1(0, -1, 0, 0.5);
  auto v = center::cohomology_solve(h, {1.0}, 0.1, 0.02);
  // cos(2 pi theta) -> sin(2 pi theta) / (2 pi)
  for (double th : {0.0, 0.1, 0.37}) {
    double got = fourier::evaluate(v, 0, {th}, 0.0).real();
    CHECK(got == doctest::Approx(std::sin(2 * pi * th) / (2 * pi)).epsilon(1e-13));
  }
  // random plug-back on a two-component table with x-modes
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  fourier::TorusMap r(1, 2, 5, 2);
  for (int c = 0; c < 2; ++c)
    for (int k = 1; k <= 5; ++k)
      for (int j = -2; j <= 2; ++j) {
        cd x(nd(rng), nd(rng));
        r.set1(c, k, j, x);
        r.set1(c, -k, -j, std::conj(x));
      }
  const double w = 1 / std::sqrt(2.0);
  auto s = center::cohomology_solve(r, {w}, 0.1, 0.02);
  CHECK((fourier::omega_derivative(s, {w}) - r).max_abs() < 1e-13);
  CHECK(std::abs(s.get1(0, 0, 1)) == 0.0);
  fourier::TorusMap bad = r;
  bad.set1(0, 0, 0, 1e-3);
  CHECK_THROWS_AS(center::cohomology_solve(bad, {w}, 0.1, 0.02), bsq::Error);
}

TEST_CASE("isotropy is trivial for one frequency") {
  auto m = models::make_model(ModelKind::Scalar, kMu);
  auto s = lindstedt::assemble_seed(*m, lindstedt::build_series(*m, 3, {1.0}), 2e-2, 8, 8);
  auto iso = center::isotropy_defect(*m, s.K, 8, 34);
  CHECK(iso.norm < 1e-15);
  CHECK(iso.L.size() == 34);
}

TEST_CASE("center frame geometry") {
  for (auto kind : {ModelKind::Scalar, ModelKind::System}) {
    auto u = setup(kind, 1e-2);
    CHECK(u.f.n == u.sp.grid.size());
    CHECK(u.f.MtJM_defect < 1e-8);
    CHECK(std::isfinite(u.f.avgS));
    CHECK(std::abs(u.f.avgS) > 1e-2);
    // the twist is eps independent to O(eps^2)
    auto v = setup(kind, 5e-3);
    CHECK(std::abs(v.f.avgS - u.f.avgS) < 1e-3 * std::abs(u.f.avgS));
    for (int n = 0; n < u.f.n; n += 7) {
      CHECK(u.f.expB[n] > 0);
      CHECK(u.f.mc[n].determinant() != doctest::Approx(0.0));
    }
  }
}

TEST_CASE("center solve recovers manufactured reduced data") {
  for (auto kind : {ModelKind::Scalar, ModelKind::System}) {
    auto u = setup(kind, 1e-2);
    const auto& g = u.sp.grid;
    const auto& f = u.f;
    const int N = f.n;
    Eigen::MatrixXcd xi1 = trig(g, 4, 1, true), xi2 = trig(g, 4, 2, false);
    Eigen::MatrixXcd d1 = g.derivative(xi1, f.omega), d2 = g.derivative(xi2, f.omega);
    Eigen::MatrixXcd F(N, u.sp.dim());
    for (int n = 0; n < N; ++n) {
      double x2 = xi2(n, 0).real();
      double p1 = d1(n, 0).real() + f.S[n] * x2;
      double p2 = d2(n, 0).real() + (f.Bred[n](1, 1) - f.b22_avg) * x2;
      F.row(n) = (f.DKc[n] * p1 + f.W2[n] * p2).transpose().cast<cd>();
    }
    auto sol = center::solve_center(f, u.sp, F);
    double e1 = 0, e2 = 0;
    for (int n = 0; n < N; ++n) {
      e1 = std::max(e1, std::abs(sol.xi1[n] - xi1(n, 0).real()));
      e2 = std::max(e2, std::abs(sol.xi2[n] - xi2(n, 0).real()));
    }
    CHECK(e1 < 1e-10);
    CHECK(e2 < 1e-10);
    CHECK(sol.exactness_defect < 1e-12);
  }
}

TEST_CASE("center solve refuses a large exactness defect") {
  auto u = setup(ModelKind::Scalar, 1e-2);
  const int N = u.f.n;
  Eigen::MatrixXcd F(N, u.sp.dim());
  // constant p2 has nonzero average: not solvable
  for (int n = 0; n < N; ++n) F.row(n) = (u.f.W2[n] * u.f.expB[n]).transpose().cast<cd>();
  center::CenterSolveOptions opt;
  opt.residual_norm = 1e-8;
  CHECK_THROWS_AS(center::solve_center(u.f, u.sp, F, opt), bsq::Error);
}
