#include <cmath>
#include <numbers>

#include "bsq/error.hpp"
#include "bsq/lindstedt.hpp"
#include "doctest.h"

using namespace bsq;
using models::ModelKind;

namespace {

constexpr double pi = std::numbers::pi;
const double kMu = 1.0 / (8 * pi * pi);

double fit_slope(const models::Model& m, const lindstedt::LindstedtSeries& s, double e1, double e2) {
  auto r = [&](double e) {
    auto seed = lindstedt::assemble_seed(m, s, e, 16, 16);
    return models::norm_Y(m, models::residual(m, seed.K, seed.omega), 0.05);
  };
  return std::log(r(e2) / r(e1)) / std::log(e2 / e1);
}

}  // namespace

TEST_CASE("multiplier values") {
  auto m = models::make_model(ModelKind::Scalar, kMu);
  auto w0 = models::center_analysis(*m).omega0;
  CHECK(std::abs(lindstedt::multiplier(*m, w0, {1}, 1)) < 1e-12);
  double q = 4 * pi;
  CHECK(std::abs(lindstedt::multiplier(*m, w0, {0}, 2) - (q * q - kMu * q * q * q * q)) < 1e-10);
  for (int k : {1, 2, 5}) CHECK(lindstedt::multiplier(*m, w0, {k}, 0) < 0);
  // F(0,2) - 2 F(2,2) = 32 pi^2 at this mu
  double comb = lindstedt::multiplier(*m, w0, {0}, 2) - 2 * lindstedt::multiplier(*m, w0, {2}, 2);
  CHECK(std::abs(comb - 32 * pi * pi) < 1e-9);
}

TEST_CASE("nonresonance scan") {
  auto m = models::make_model(ModelKind::Scalar, kMu);
  auto w0 = models::center_analysis(*m).omega0;
  auto r5 = lindstedt::nonresonance_check(*m, w0, 5);
  CHECK(r5.pass);
  CHECK(r5.min_abs_F > 0);
  CHECK(lindstedt::nonresonance_check(*m, w0, 1).pass);
  // ell = 2 at mu = 1/(20 pi^2): the first center frequency equals the j = 2 dispersion, F((1,0), 2) = 0
  auto m2 = models::make_model(ModelKind::Scalar, 1 / (20 * pi * pi));
  auto w2 = models::center_analysis(*m2).omega0;
  REQUIRE(w2.size() == 2);
  auto bad = lindstedt::nonresonance_check(*m2, w2, 2);
  CHECK(!bad.pass);
  bool found = false;
  for (const auto& r : bad.resonant) found = found || (r.k == std::vector<int>{1, 0} && r.j == 2);
  CHECK(found);
  try {
    lindstedt::build_series(*m2, 2, {1.0, 1.0});
    FAIL("resonant series accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Resonant);
  }
}

TEST_CASE("scalar order-2 term") {
  auto m = models::make_model(ModelKind::Scalar, kMu);
  auto w0 = models::center_analysis(*m).omega0;
  const double A = 1.3;
  auto s = lindstedt::build_series(*m, 2, {A});
  CHECK(s.kernel_component[1] < 1e-12);
  // U2 = -4 pi^2 A^2 [cos(4 pi theta) cos(4 pi x) / F(2,2) + cos(4 pi x) / F(0,2)]
  double F22 = lindstedt::multiplier(*m, w0, {2}, 2), F02 = lindstedt::multiplier(*m, w0, {0}, 2);
  auto U2 = s.Z[1];
  CHECK(std::abs(U2.get1(0, 2, 2).real() - (-4 * pi * pi * A * A / (4 * F22))) < 1e-12);
  CHECK(std::abs(U2.get1(0, 0, 2).real() - (-4 * pi * pi * A * A / (2 * F02))) < 1e-12);
  CHECK(std::abs(U2.get1(0, 1, 1)) < 1e-14);
}

TEST_CASE("omega2 is nonzero and scales with the amplitude squared") {
  auto m = models::make_model(ModelKind::Scalar, kMu);
  auto s1 = lindstedt::build_series(*m, 3, {1.0}), s2 = lindstedt::build_series(*m, 3, {2.0});
  double w21 = s1.omega.at(1).at(0), w22 = s2.omega.at(1).at(0);
  CHECK(std::abs(w21) > 0.1);
  CHECK(std::abs(w22 / w21 - 4) < 1e-12);
  CHECK(std::abs(s1.omega.at(0).at(0)) < 1e-12);
  CHECK(s1.kernel_leftover.back() < 1e-12);
}

TEST_CASE("omega2 follows the order-2 multipliers across mu") {
  // projecting the order-3 equation on cos(2 pi theta) cos(2 pi x):
  // omega2 = -(2 pi^2 A^2 / omega0) (1/F(0,2) + 1/(2 F(2,2)))
  for (double c : {0.3, 0.5, 0.7}) {
    auto m = models::make_model(ModelKind::Scalar, c / (4 * pi * pi));
    auto w0 = models::center_analysis(*m).omega0;
    auto s = lindstedt::build_series(*m, 3, {1.0});
    double F22 = lindstedt::multiplier(*m, w0, {2}, 2), F02 = lindstedt::multiplier(*m, w0, {0}, 2);
    double want = -2 * pi * pi / w0[0] * (1 / F02 + 1 / (2 * F22));
    CHECK(std::abs(s.omega.at(1).at(0) - want) < 1e-10 * std::abs(want));
  }
}

TEST_CASE("system order-2 kernel component vanishes") {
  auto m = models::make_model(ModelKind::System, kMu);
  auto s = lindstedt::build_series(*m, 3, {1.0});
  CHECK(s.kernel_component[1] < 1e-12);
  CHECK(std::abs(s.omega.at(0).at(0)) < 1e-12);
  CHECK(std::abs(s.omega.at(1).at(0)) > 1e-3);
}

TEST_CASE("seed assembly") {
  auto m = models::make_model(ModelKind::Scalar, kMu);
  auto s = lindstedt::build_series(*m, 3, {1.0});
  auto z = lindstedt::assemble_seed(*m, s, 0.0, 8, 8);
  CHECK(z.K.max_abs() == 0.0);
  CHECK(z.omega == s.omega0);
  CHECK(std::abs(fit_slope(*m, lindstedt::build_series(*m, 1, {1.0}), 1e-3, 2e-3) - 2) < 0.05);
  CHECK(std::abs(fit_slope(*m, s, 1e-3, 2e-3) - 4) < 0.1);
  auto sy = models::make_model(ModelKind::System, kMu);
  CHECK(std::abs(fit_slope(*sy, lindstedt::build_series(*sy, 2, {1.0}), 1e-3, 2e-3) - 3) < 0.1);
}
