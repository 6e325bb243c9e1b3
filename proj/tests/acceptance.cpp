// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (no arguments runs all of them)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bsq/center.hpp"
#include "bsq/cocycle.hpp"
#include "bsq/error.hpp"
#include "bsq/fourier.hpp"
#include "bsq/hyperbolic.hpp"
#include "bsq/lindstedt.hpp"
#include "bsq/models.hpp"
#include "bsq/newton.hpp"

using namespace bsq;
using fourier::TorusMap;
using hyperbolic::BundleKind;
using cd = std::complex<double>;

namespace {

constexpr double pi = std::numbers::pi;
const double kMu = 1.0 / (8 * pi * pi);
constexpr int kKt = 16, kKx = 16;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmtd(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ordinary least-squares slope and intercept of y against x
std::pair<double, double> ls_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / n, my = sy / n, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  double b = sxy / sxx;
  return {b, my - b * mx};
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return v;
}

std::unique_ptr<models::Model> make(models::ModelKind k) { return models::make_model(k, kMu, 3); }

lindstedt::Seed seed(const models::Model& m, int N, double eps, int kx = kKx) {
  auto s = lindstedt::build_series(m, N, {1.0});
  return lindstedt::assemble_seed(m, s, eps, kKt, kx);
}

newton::NewtonOptions quiet_options() {
  newton::NewtonOptions o;
  o.precheck_rates = false;
  return o;
}

// ---------------------------------------------------------------- 1, 13a
Outcome lindstedt_order(models::ModelKind kind) {
  auto t0 = std::chrono::steady_clock::now();
  auto model = make(kind);
  auto eps = log_grid(1e-4, 1e-2, 9);
  std::string d;
  bool ok = true;
  for (int N = 1; N <= 3; ++N) {
    auto series = lindstedt::build_series(*model, N, {1.0});
    std::vector<double> x, y;
    for (double e : eps) {
      auto s = lindstedt::assemble_seed(*model, series, e, kKt, kKx);
      double r = models::norm_Y(*model, models::residual(*model, s.K, s.omega), 0.05);
      x.push_back(std::log(e));
      y.push_back(std::log(r));
    }
    double slope = ls_fit(x, y).first;
    ok = ok && std::abs(slope - (N + 1)) <= 0.1;
    d += fmtd("N=%d slope %.4f; ", N, slope);
  }
  double dt = seconds_since(t0);
  ok = ok && dt < 30;
  d += fmtd("%.1f s", dt);
  return {ok, d};
}

// ---------------------------------------------------------------- 2, 13b
Outcome kernel_order2(models::ModelKind kind) {
  auto model = make(kind);
  auto series = lindstedt::build_series(*model, 2, {1.0});
  double reported = series.kernel_component.at(1);
  // oracle: kernel component of the order-2 right-hand side N(Z1) read off the (k = 1, j = 1) mode
  TorusMap z1 = lindstedt::assemble_seed(*model, lindstedt::build_series(*model, 1, {1.0}), 1.0, 4, 4).K;
  TorusMap n2 = model->nonlinearity(z1);
  double direct = 0;
  for (int c = 0; c < n2.d(); ++c)
    for (int k : {-1, 1})
      for (int j : {-1, 1})
        if (n2.in_range({k}, j)) direct = std::max(direct, std::abs(n2.get1(c, k, j)));
  bool ok = reported < 1e-12 && direct < 1e-12;
  return {ok, fmtd("series %.2e, direct projection %.2e", reported, direct)};
}

// ---------------------------------------------------------------- 3
double amplitude(const TorusMap& K) { return 4 * K.get1(0, 1, 1).real(); }

Outcome omega2_oracle() {
  auto model = make(models::ModelKind::Scalar);
  auto series = lindstedt::build_series(*model, 3, {1.0});
  double w2 = series.omega.at(1).at(0);
  double om[2], a[2];
  const double eps[2] = {1e-2, 2e-2};
  for (int i = 0; i < 2; ++i) {
    auto s = lindstedt::assemble_seed(*model, series, eps[i], kKt, kKx);
    auto r = newton::run(*model, s.K, s.omega, quiet_options());
    if (!r.converged) return {false, fmtd("run at eps=%.0e did not converge", eps[i])};
    om[i] = r.omega[0];
    a[i] = amplitude(r.K_final);
  }
  double fd = (om[1] - om[0]) / (a[1] * a[1] - a[0] * a[0]);
  double rel = std::abs(fd - w2) / std::abs(fd);
  bool ok = w2 != 0 && rel <= 0.05;
  return {ok, fmtd("omega2 series %.7f, finite difference %.7f, rel %.2e", w2, fd, rel)};
}

// ---------------------------------------------------------------- 4, 13c
Outcome quadratic_newton(models::ModelKind kind) {
  auto model = make(kind);
  auto s = seed(*model, 3, 1e-2);
  auto r = newton::run(*model, s.K, s.omega);
  double fin = r.residuals.back();
  int steps = static_cast<int>(r.steps.size());
  bool conv = r.converged && fin <= 1e-11 && steps <= 6;
  // joint fit of log10 E_{m+1} = 2 log10 E_m + c over first steps from neighbouring seeds
  std::vector<std::pair<double, double>> pairs;
  auto collect = [&](const std::vector<double>& res) {
    for (size_t i = 0; i + 1 < res.size(); ++i)
      if (res[i + 1] > 1e-14) pairs.push_back({std::log10(res[i]), std::log10(res[i + 1])});
  };
  collect(r.residuals);
  for (double e : {5e-3, 2e-2}) {
    auto s2 = seed(*model, 3, e);
    auto r2 = newton::run(*model, s2.K, s2.omega, quiet_options());
    collect(r2.residuals);
  }
  double c = 0;
  for (auto [x, y] : pairs) c += y - 2 * x;
  c /= static_cast<double>(pairs.size());
  double dev = 0;
  for (auto [x, y] : pairs) dev = std::max(dev, std::abs(y - 2 * x - c));
  bool ok = conv && pairs.size() >= 2 && dev <= 0.5;
  std::string res;
  for (double x : r.residuals) res += fmtd("%.1e ", x);
  return {ok, fmtd("residuals %s(%d steps); c = %.3f, max deviation %.3f over %zu pairs", res.c_str(), steps, c, dev,
                   pairs.size())};
}

// ---------------------------------------------------------------- 5
Outcome duhamel_vs_direct() {
  auto t0 = std::chrono::steady_clock::now();
  auto model = make(models::ModelKind::Scalar);
  auto s = seed(*model, 3, 1e-2);
  auto sp = hyperbolic::compute_splitting(*model, s.K, s.omega[0], kKx);
  models::Fiber fib(*model, kKx);
  Eigen::VectorXd wx = fib.weights_X(0), wy = fib.weights_Y(0);
  const double rho = 0.05;
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> nd;
  // analytic random fields on the solver band |k| <= Ktheta, strip width 0.2
  const int K = kKt;
  double worst = 0;
  int count = 0;
  for (BundleKind b : {BundleKind::Stable, BundleKind::Unstable}) {
    std::vector<Eigen::MatrixXcd> rhs;
    for (int n = 0; n < 50; ++n) {
      Eigen::MatrixXcd coef = Eigen::MatrixXcd::Zero(2 * K + 1, sp.dim());
      for (int k = -K; k <= K; ++k)
        for (int i = 0; i < sp.dim(); ++i) {
          int j = i % kKx + 1;
          double decay = std::exp(-2 * pi * 0.2 * std::abs(k)) / std::pow(j, 4);
          coef(k + K, i) = decay * cd(nd(rng), nd(rng));
        }
      Eigen::MatrixXcd F = sp.grid.synth(coef).real().cast<cd>();
      F = hyperbolic::apply_projection(sp, b, F);
      F /= hyperbolic::grid_field_norm(sp, F, wy, rho);
      rhs.push_back(F);
    }
    auto duh = hyperbolic::solve_duhamel_batch(sp, b, rhs);
    for (size_t n = 0; n < rhs.size(); ++n) {
      Eigen::MatrixXcd dir = hyperbolic::solve_hyperbolic_direct(sp, b, rhs[n]);
      worst = std::max(worst, hyperbolic::grid_field_norm(sp, duh[n] - dir, wx, rho));
      ++count;
    }
  }
  double dt = seconds_since(t0);
  bool ok = worst <= 1e-8 && dt < 60;
  return {ok, fmtd("%d right-hand sides (||F||_Y = 1), max X difference %.2e, %.1f s", count, worst, dt)};
}

// ---------------------------------------------------------------- 6
Outcome smoothing_rates() {
  auto model = make(models::ModelKind::Scalar);
  auto spec = models::center_analysis(*model);
  auto sp = hyperbolic::unperturbed_splitting(*model, kKx, spec.omega0[0], kKt);
  auto r = hyperbolic::rate_estimate(sp);
  // oracle: min over hyperbolic j of sqrt((2 pi j)^2 (mu (2 pi j)^2 - 1))
  double dmin = INFINITY;
  for (int j = 1; j <= kKx; ++j) {
    double q = 2 * pi * j, s2 = q * q * (kMu * q * q - 1);
    if (s2 > 0) dmin = std::min(dmin, std::sqrt(s2));
  }
  double rel = std::abs(r.b1 - dmin) / dmin;
  bool ok = r.a1 >= 0.4 && r.a1 <= 0.6 && rel <= 0.05;
  return {ok, fmtd("alpha1 %.4f (stderr %.3f), beta1 %.5f vs dispersion minimum %.5f (rel %.2e)", r.a1, r.a1_stderr,
                   r.b1, dmin, rel)};
}

// ---------------------------------------------------------------- 7
Outcome perturbation_law() {
  auto model = make(models::ModelKind::Scalar);
  auto spec = models::center_analysis(*model);
  const double om = spec.omega0[0], rho = 0.05;
  models::Fiber fib(*model, kKx);
  Eigen::VectorXd wx = fib.weights_X(0);
  // fixed direction: order-1 Lindstedt term plus a low-mode theta-dependent shape
  auto dir = seed(*model, 1, 1.0).K;
  dir.set1(0, 2, 1, 0.3);
  dir.set1(0, -2, 1, 0.3);
  dir.set1(0, 1, 2, cd(0.1, 0.2));
  dir.set1(0, -1, 2, cd(0.1, -0.2));
  dir = models::enforce_constraints(*model, dir);
  auto base = hyperbolic::compute_splitting(*model, 0.0 * dir, om, kKx);
  auto r0 = hyperbolic::rate_estimate(base);
  std::vector<double> ratios;
  std::string d;
  bool alpha_ok = true;
  for (double s : {1e-4, 1e-3, 1e-2}) {
    TorusMap K = s * dir;
    auto sp = hyperbolic::compute_splitting(*model, K, om, kKx);
    double dA = hyperbolic::linearize_perturbation(*model, K, kKx).perturbation_norm(fib, rho);
    double dP = 0;
    for (BundleKind b : {BundleKind::Stable, BundleKind::Center, BundleKind::Unstable}) {
      std::vector<Eigen::MatrixXd> diff;
      for (size_t i = 0; i < sp.projection(b).size(); ++i) diff.push_back(sp.projection(b)[i] - base.projection(b)[i]);
      dP = std::max(dP, hyperbolic::projection_norm(sp, diff, wx, wx, rho));
    }
    ratios.push_back(dP / dA);
    auto r = hyperbolic::rate_estimate(sp);
    double n1 = 3 * std::hypot(r.a1_stderr, r0.a1_stderr) + 1e-3, n2 = 3 * std::hypot(r.a2_stderr, r0.a2_stderr) + 1e-3;
    alpha_ok = alpha_ok && std::abs(r.a1 - r0.a1) <= n1 && std::abs(r.a2 - r0.a2) <= n2;
    d += fmtd("s=%.0e ratio %.5f alpha (%.4f, %.4f); ", s, dP / dA, r.a1, r.a2);
  }
  double lo = *std::min_element(ratios.begin(), ratios.end()), hi = *std::max_element(ratios.begin(), ratios.end());
  double spread = hi / lo - 1;
  d += fmtd("spread %.2e, alpha at K=0 (%.4f, %.4f)", spread, r0.a1, r0.a2);
  return {spread <= 0.1 && alpha_ok, d};
}

// ---------------------------------------------------------------- 8
// Deterministic theta-non-reversible direction on low modes (k <= 2, j <= 3), scaled so that
// its linear residual at K has unit Y-norm. On reversible tori the average vanishes identically.
TorusMap nonreversible_direction(const models::Model& model, const TorusMap& K, const std::vector<double>& omega) {
  TorusMap P(K.l(), K.d(), K.kt(), K.kx());
  for (int c = 0; c < K.d(); ++c)
    for (int k = 0; k <= 2; ++k)
      for (int j = 1; j <= 3; ++j) {
        cd v(std::sin(1.0 + k + 2.0 * j + 3.0 * c), std::cos(2.0 * k + j - c));
        P.set1(c, k, j, v);
        P.set1(c, -k, -j, std::conj(v));
      }
  fourier::symmetrize_reality(P);
  P = models::enforce_constraints(model, P);
  const double h = 1e-8;
  TorusMap dE = models::residual(model, K + h * P, omega) - models::residual(model, K, omega);
  return (h / models::norm_Y(model, dE, 0.05)) * P;
}

Outcome exactness_slope() {
  auto model = make(models::ModelKind::Scalar);
  models::Fiber fib(*model, kKx);
  std::string d;
  bool ok = true;
  for (double eps : {5e-3, 1e-2, 2e-2}) {
    auto s = seed(*model, 3, eps);
    TorusMap P = nonreversible_direction(*model, s.K, s.omega);
    std::vector<double> x, y;
    for (double size : log_grid(1e-3, 1e-1, 5)) {
      TorusMap K = models::enforce_constraints(*model, s.K + size * P);
      TorusMap E = models::residual(*model, K, s.omega);
      auto sp = hyperbolic::compute_splitting(*model, K, s.omega[0], kKx);
      // off an invariant torus avg(b22) is O(||E||); only DKc is needed here
      center::FrameOptions fo;
      fo.b22_avg_tol = 1.0;
      auto fr = center::build_center_frame(*model, K, sp, fo);
      Eigen::MatrixXcd Eg = sp.grid.synth(fib.to_fiber(E));
      double avg = std::abs(center::exactness_average(fr, fib, hyperbolic::apply_projection(sp, BundleKind::Center, Eg)));
      x.push_back(std::log(models::norm_Y(*model, E, 0.05)));
      y.push_back(std::log(avg));
    }
    double slope = ls_fit(x, y).first;
    ok = ok && std::abs(slope - 2) <= 0.15;
    d += fmtd("eps=%.0e slope %.4f; ", eps, slope);
  }
  d += "Lindstedt-3 seeds plus s P, ||E|| in [1e-3, 1e-1]";
  return {ok, d};
}

// ---------------------------------------------------------------- 9
Outcome isotropy_run() {
  auto model = make(models::ModelKind::Scalar);
  auto s = seed(*model, 3, 2e-2);
  std::vector<double> L, E;
  auto opt = quiet_options();
  opt.on_step = [&](const newton::NewtonState& st) {
    L.push_back(center::isotropy_defect(*model, st.K, st.kx, 4 * st.K.kt() + 2).norm);
    E.push_back(st.reports.back().resid_next);
  };
  auto r = newton::run(*model, s.K, s.omega, opt);
  double Lfin = center::isotropy_defect(*model, r.K_final, kKx, 4 * kKt + 2).norm;
  double Efin = r.residuals.back();
  double C = 0;
  for (size_t i = 0; i < L.size(); ++i) C = std::max(C, E[i] > 0 ? L[i] / E[i] : (L[i] > 0 ? INFINITY : 0));
  bool ok = r.converged && Lfin <= 10 * Efin && std::isfinite(C);
  return {ok, fmtd("final ||L|| %.2e vs residual %.2e, sup ||L_m||/||E_m|| = %.2e (L = DK^T J DK is 1x1, zero for one angle)",
                   Lfin, Efin, C)};
}

// ---------------------------------------------------------------- 10
Outcome center_symplectic() {
  auto model = make(models::ModelKind::Scalar);
  auto s = seed(*model, 3, 1e-2);
  auto r = newton::run(*model, s.K, s.omega, quiet_options());
  if (!r.converged) return {false, "run did not converge"};
  auto sp = hyperbolic::compute_splitting(*model, r.K_final, r.omega[0], kKx);
  models::Fiber fib(*model, kKx);
  const Eigen::MatrixXd& J = fib.J();
  double drift = 0;
  for (double th : {0.0, 0.3, 0.71}) {
    Eigen::MatrixXd Pc = hyperbolic::projection_at(sp, BundleKind::Center, th);
    Eigen::VectorXd u = Pc.col(fib.slot(0, 1)), v = Pc.col(fib.slot(1, 1));
    double w0 = u.dot(J * v);
    for (int t = 1; t <= 50; ++t) {
      Eigen::MatrixXd U = hyperbolic::cocycle_physical(sp, BundleKind::Center, th, t);
      double w = (U * u).dot(J * (U * v));
      drift = std::max(drift, std::abs(w - w0) / std::abs(w0));
    }
  }
  return {drift <= 1e-9, fmtd("max relative drift of Omega(U u, U v) over t in [0, 50]: %.2e", drift)};
}

// ---------------------------------------------------------------- 11
Outcome uniqueness() {
  auto model = make(models::ModelKind::Scalar);
  auto s = seed(*model, 3, 1e-2);
  const double tau0 = 0.37;
  auto r1 = newton::run(*model, s.K, s.omega, quiet_options());
  auto r2 = newton::run(*model, fourier::phase_shift(s.K, {tau0}), s.omega, quiet_options());
  if (!r1.converged || !r2.converged) return {false, "a run did not converge"};
  auto al = newton::phase_align(*model, r1.K_final, r2.K_final);
  // oracle distance: direct X-norm of K2 - K1(. + tau*)
  double dist = models::norm_X(*model, r2.K_final - fourier::phase_shift(r1.K_final, {al.tau}), 0.05);
  bool ok = dist <= 1e-9 && std::abs(al.tau - tau0) <= 1e-6;
  return {ok, fmtd("tau* = %.12f, aligned distance %.2e (reported %.2e)", al.tau, dist, al.distance)};
}

// ---------------------------------------------------------------- 12
Outcome galerkin_refinement() {
  auto model = make(models::ModelKind::Scalar);
  std::vector<TorusMap> K;
  std::vector<hyperbolic::Rates> R;
  for (int kx : {kKx, 2 * kKx}) {
    auto s = seed(*model, 3, 1e-2, kx);
    auto r = newton::run(*model, s.K, s.omega, quiet_options());
    if (!r.converged) return {false, fmtd("run at Kx=%d did not converge", kx)};
    K.push_back(r.K_final);
    auto sp = hyperbolic::compute_splitting(*model, r.K_final, r.omega[0], kx);
    R.push_back(hyperbolic::rate_estimate(sp));
  }
  double dX = models::norm_X(*model, K[1] - fourier::resize(K[0], kKt, 2 * kKx), 0.05);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); };
  double worst = std::max({rel(R[0].Ch, R[1].Ch), rel(R[0].a1, R[1].a1), rel(R[0].a2, R[1].a2), rel(R[0].b1, R[1].b1),
                           rel(R[0].b2, R[1].b2)});
  double b3 = std::max(std::abs(R[0].b3p - R[1].b3p), std::abs(R[0].b3m - R[1].b3m)) / std::abs(R[0].b1);
  bool ok = dX <= 1e-9 && worst <= 0.01 && b3 <= 0.01;
  return {ok, fmtd("torus change %.2e (X), worst relative rate change %.2e, beta3 change %.2e of beta1", dX, worst, b3)};
}

// ---------------------------------------------------------------- 13
Outcome system_parity() {
  auto a = lindstedt_order(models::ModelKind::System);
  auto b = kernel_order2(models::ModelKind::System);
  auto c = quadratic_newton(models::ModelKind::System);
  return {a.pass && b.pass && c.pass, "[1] " + a.detail + " | [2] " + b.detail + " | [4] " + c.detail};
}

}  // namespace

int main(int argc, char** argv) {
  struct Crit {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Crit> all = {
      {1, "lindstedt order certificate", [] {
         auto a = lindstedt_order(models::ModelKind::Scalar);
         auto b = lindstedt_order(models::ModelKind::System);
         return Outcome{a.pass && b.pass, "scalar: " + a.detail + " | system: " + b.detail};
       }},
      {2, "order-2 kernel component vanishes", [] {
         auto a = kernel_order2(models::ModelKind::Scalar);
         auto b = kernel_order2(models::ModelKind::System);
         return Outcome{a.pass && b.pass, "scalar: " + a.detail + " | system: " + b.detail};
       }},
      {3, "omega2 nonzero, matches KAM finite differences", omega2_oracle},
      {4, "quadratic Newton convergence", [] { return quadratic_newton(models::ModelKind::Scalar); }},
      {5, "Duhamel vs direct hyperbolic solve", duhamel_vs_direct},
      {6, "smoothing rates at K = 0", smoothing_rates},
      {7, "splitting perturbation law", perturbation_law},
      {8, "exactness average slope", exactness_slope},
      {9, "isotropy at convergence", isotropy_run},
      {10, "symplectic conservation on the center", center_symplectic},
      {11, "uniqueness up to phase", uniqueness},
      {12, "Galerkin refinement stability", galerkin_refinement},
      {13, "system: criteria 1, 2, 4", system_parity},
  };
  std::set<int> want;
  for (int i = 1; i < argc; ++i) want.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!want.empty() && !want.count(c.id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const Error& e) {
      o = {false, std::string("error [") + to_string(e.kind()) + "]: " + e.what()};
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s criterion %2d  %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
