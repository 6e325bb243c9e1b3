#include <cmath>
#include <numbers>

#include "bsq/error.hpp"
#include "bsq/lindstedt.hpp"
#include "bsq/newton.hpp"
#include "doctest.h"

using namespace bsq;
using models::ModelKind;
using cd = std::complex<double>;

namespace {

constexpr double pi = std::numbers::pi;
const double kMu = 1.0 / (8 * pi * pi);

lindstedt::Seed seed(const models::Model& m, double eps, int kt = 8, int kx = 8) {
  return lindstedt::assemble_seed(m, lindstedt::build_series(m, 3, {1.0}), eps, kt, kx);
}

newton::NewtonOptions fast() {
  newton::NewtonOptions o;
  o.precheck_rates = false;
  return o;
}

// K(theta, .) as a theta-independent slice
fourier::TorusMap slice_at(const fourier::TorusMap& K, double th) {
  fourier::TorusMap s(1, K.d(), 0, K.kx());
  for (int c = 0; c < K.d(); ++c)
    for (int j = -K.kx(); j <= K.kx(); ++j) {
      cd acc = 0;
      for (int k = -K.kt(); k <= K.kt(); ++k) acc += K.get1(c, k, j) * std::exp(cd(0, 2 * pi * k * th));
      s.set1(c, 0, j, acc);
    }
  return s;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const bsq::Error& e) {
    return e.kind();
  }
  return ErrorKind::Structural;
}

struct Converged {
  std::unique_ptr<models::Model> m;
  newton::RunReport r;
};

const Converged& converged() {
  static Converged c = [] {
    Converged x;
    x.m = models::make_model(ModelKind::Scalar, kMu);
    auto s = seed(*x.m, 1e-2);
    x.r = newton::run(*x.m, s.K, s.omega, fast());
    return x;
  }();
  return c;
}

}  // namespace

TEST_CASE("schedule") {
  newton::Schedule s;
  CHECK(s.first_delta() == doctest::Approx(0.05 / 12));
  CHECK(s.rho(1) == doctest::Approx(0.05));
  CHECK(s.rho(2) == doctest::Approx(0.05 - 3 * 0.05 / 12));
  CHECK(s.delta(3) == doctest::Approx(0.05 / 48));
  CHECK(s.rho(60) == doctest::Approx(s.rho_inf()).epsilon(1e-12));
  CHECK(s.rho_inf() == doctest::Approx(0.025));
}

TEST_CASE("quadratic fit") {
  // E_{m+1} = 3 E_m^2
  std::vector<double> r{1e-3};
  for (int i = 0; i < 3; ++i) r.push_back(3 * r.back() * r.back());
  auto f = newton::quadratic_fit(r);
  CHECK(f.pairs == 2);  // the last step lands below the floor
  CHECK(f.c == doctest::Approx(std::log10(3.0)));
  CHECK(f.max_dev < 1e-12);
  CHECK(newton::quadratic_fit({1e-3}).pairs == 0);
}

TEST_CASE("run converges and the torus is a fixed point") {
  const auto& c = converged();
  REQUIRE(c.r.converged);
  CHECK(c.r.residuals.back() < 1e-11);
  CHECK(c.r.final_isotropy < 1e-14);
  auto st = newton::initial_state(*c.m, c.r.K_final, c.r.omega);
  auto next = newton::newton_step(*c.m, st, fast());
  CHECK((next.K - c.r.K_final).max_abs() < 1e-13);
  CHECK(next.residuals.back() < 1e-12);
}

TEST_CASE("energy is constant along the converged torus") {
  const auto& c = converged();
  std::vector<double> H;
  for (double th : {0.0, 0.13, 0.29, 0.5, 0.77}) H.push_back(models::hamiltonian(*c.m, slice_at(c.r.K_final, th)));
  double lo = *std::min_element(H.begin(), H.end()), hi = *std::max_element(H.begin(), H.end());
  CHECK(hi - lo < 1e-12 * std::max(1e-4, std::abs(hi)));
  // H != 0 so the check is not vacuous
  CHECK(std::abs(hi) > 1e-6);
}

TEST_CASE("a-posteriori ledger") {
  const auto& c = converged();
  newton::AposterioriOptions ao;
  ao.measure_rates = false;
  auto good = newton::aposteriori_check(*c.m, c.r.K_final, c.r.omega, ao);
  CHECK(good.pass);
  CHECK_FALSE(good.lines.empty());
  auto noisy = c.r.K_final;
  noisy.set1(0, 3, 2, noisy.get1(0, 3, 2) + 1e-3);
  noisy.set1(0, -3, -2, noisy.get1(0, -3, -2) + 1e-3);
  auto bad = newton::aposteriori_check(*c.m, noisy, c.r.omega, ao);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("large seeds fail the precheck unless forced") {
  auto m = models::make_model(ModelKind::Scalar, kMu);
  auto s = seed(*m, 0.5);
  auto o = fast();
  CHECK(kind_of([&] { newton::run(*m, s.K, s.omega, o); }) == ErrorKind::PrecheckFailed);
  o.force = true;
  o.max_iter = 0;
  auto r = newton::run(*m, s.K, s.omega, o);
  CHECK(r.heuristic_override);
}

TEST_CASE("phase alignment") {
  const auto& c = converged();
  auto shifted = fourier::phase_shift(c.r.K_final, {0.1});
  auto al = newton::phase_align(*c.m, c.r.K_final, shifted);
  double t = al.tau - std::floor(al.tau);
  CHECK(t == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(al.relative < 1e-12);
  auto other = seed(*c.m, 2e-2).K;
  CHECK(kind_of([&] { newton::phase_align(*c.m, c.r.K_final, other); }) == ErrorKind::AlignmentFailure);
}

TEST_CASE("system run converges") {
  auto m = models::make_model(ModelKind::System, kMu);
  auto s = seed(*m, 1e-2);
  auto r = newton::run(*m, s.K, s.omega, fast());
  CHECK(r.converged);
  CHECK(r.residuals.front() > 1e3 * r.residuals.back());
}
