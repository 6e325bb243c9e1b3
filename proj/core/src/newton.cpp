#include "bsq/newton.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "bsq/error.hpp"

namespace bsq::newton {

using std::numbers::pi;
using cd = std::complex<double>;
using hyperbolic::BundleKind;

double Schedule::rho(int m) const {
  double r = rho0, d = first_delta();
  for (int i = 1; i < m; ++i) {
    r -= 3 * d;
    d *= halving;
  }
  return r;
}

double Schedule::delta(int m) const {
  double d = first_delta();
  for (int i = 1; i < m; ++i) d *= halving;
  return d;
}

namespace {

// (omega d - A) Delta - F on the grid, in the Y norm relative to F
double linear_defect(const hyperbolic::SplittingData& sp, const models::Fiber& fib, const Eigen::MatrixXcd& Delta,
                     const Eigen::MatrixXcd& F, double rho) {
  Eigen::MatrixXcd L = sp.grid.derivative(Delta, sp.omega);
  for (int n = 0; n < sp.grid.size(); ++n)
    L.row(n) -= (sp.A.eval(sp.grid.theta(n)) * Delta.row(n).transpose()).transpose();
  L -= F;
  Eigen::VectorXd w = fib.weights_Y(0);
  double nf = hyperbolic::grid_field_norm(sp, F, w, rho);
  return nf > 0 ? hyperbolic::grid_field_norm(sp, L, w, rho) / nf : 0.0;
}

template <class Fn>
auto with_context(int m, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    fail(e.kind(), "newton step " + std::to_string(m) + ": " + e.what());
  }
}

}  // namespace

NewtonState initial_state(const models::Model& model, const TorusMap& K0, const std::vector<double>& omega,
                          const Schedule& schedule) {
  if (K0.l() != 1) fail(ErrorKind::Structural, "the Newton iteration is implemented for l = 1");
  NewtonState st;
  st.K = K0;
  st.omega = omega;
  st.kx = K0.kx();
  st.residuals.push_back(models::norm_Y(model, models::residual(model, K0, omega), schedule.rho0));
  return st;
}

NewtonState newton_step(const models::Model& model, const NewtonState& st, const NewtonOptions& opt) {
  const int m = st.m + 1;
  const double rho = opt.schedule.rho(m), delta = opt.schedule.delta(m);
  if (!(rho - 3 * delta > opt.schedule.rho_inf() - 1e-15) || !(rho > opt.schedule.rho_inf()))
    fail(ErrorKind::ScheduleExhausted, "strip width would drop below rho_inf at step " + std::to_string(m));
  models::Fiber fib(model, st.kx);
  const double om = st.omega.at(0);
  StepReport rep;
  rep.m = m;
  rep.rho = rho;
  rep.delta = delta;

  TorusMap E = models::residual(model, st.K, st.omega);
  rep.resid_Y = models::norm_Y(model, E, rho);

  const bool refresh = !st.splitting || opt.refresh_every <= 1 || st.m % opt.refresh_every == 0;
  rep.refreshed = refresh;
  auto sp = refresh ? with_context(m, [&] {
    auto A = hyperbolic::linearize(model, st.K, st.kx);
    if (opt.warm_start && st.splitting)
      return std::make_shared<const hyperbolic::SplittingData>(
          hyperbolic::graph_transform_update(*st.splitting, A, opt.split));
    return std::make_shared<const hyperbolic::SplittingData>(
        hyperbolic::compute_splitting(model, st.K, om, st.kx, opt.split));
  })
                    : st.splitting;
  if (opt.measure_rates && refresh) {
    auto copy = std::make_shared<hyperbolic::SplittingData>(*sp);
    copy->rates = with_context(m, [&] { return hyperbolic::rate_estimate(*copy, opt.rate_opt); });
    sp = copy;
  }
  rep.rates = sp->rates;
  rep.proj_defect = sp->proj_defect;
  rep.invariance_defect = sp->invariance_defect;
  rep.strip_width = sp->strip_width;
  rep.graph_iterations = std::max({sp->s.iterations, sp->c.iterations, sp->u.iterations});

  auto frame = with_context(m, [&] {
    return std::make_shared<const center::CenterFrame>(center::build_center_frame(model, st.K, *sp));
  });
  rep.avgS = frame->avgS;
  rep.avgS_inv = frame->avgS_inv_norm;
  rep.e1 = frame->e1;
  rep.e2 = frame->e2;
  rep.MtJM_defect = frame->MtJM_defect;
  rep.isotropy = frame->isotropy_norm;
  rep.kappa_hat = center::diophantine_estimate(st.omega, opt.nu, std::max(1, st.K.kt())).kappa_hat;

  const auto& g = sp->grid;
  Eigen::MatrixXcd F = -g.synth(fib.to_fiber(E));
  Eigen::MatrixXcd Delta = Eigen::MatrixXcd::Zero(g.size(), sp->dim());
  with_context(m, [&] {
    for (BundleKind b : {BundleKind::Stable, BundleKind::Unstable}) {
      if (sp->bundle(b).rank() == 0) continue;
      Eigen::MatrixXcd Fb = hyperbolic::apply_projection(*sp, b, F);
      if (!opt.use_duhamel)
        Delta += hyperbolic::solve_hyperbolic_direct(*sp, b, Fb);
      else if (b == BundleKind::Stable)
        Delta += hyperbolic::solve_stable(*sp, Fb, opt.quad);
      else
        Delta += hyperbolic::solve_unstable(*sp, Fb, opt.quad);
    }
    center::CenterSolveOptions co;
    co.residual_norm = rep.resid_Y;
    co.exactness_factor = opt.exactness_factor;
    co.tau_avg = opt.tau_avg;
    auto cs = center::solve_center(*frame, *sp, hyperbolic::apply_projection(*sp, BundleKind::Center, F), co);
    rep.exactness_defect = cs.exactness_defect;
    Delta += cs.W;
    return 0;
  });
  Delta = Delta.real().cast<cd>();
  rep.linear_defect = linear_defect(*sp, fib, Delta, F, rho - 2 * delta);

  TorusMap dK = fib.from_fiber(g.anal(Delta, st.K.kt()), st.K.kt());
  dK = fourier::resize(dK, st.K.kt(), st.K.kx());
  TorusMap raw = st.K + dK;
  models::ConstraintOptions c;
  c.theta_parity = opt.theta_parity;
  TorusMap Knew = models::enforce_constraints(model, raw, c);
  rep.delta_X = models::norm_X(model, dK, rho - 2 * delta);
  rep.enforcement = models::norm_X(model, Knew - raw, rho - 2 * delta);

  NewtonState out;
  out.m = m;
  out.K = std::move(Knew);
  out.omega = st.omega;
  out.kx = st.kx;
  out.residuals = st.residuals;
  rep.resid_next = models::norm_Y(model, models::residual(model, out.K, out.omega), opt.schedule.rho(m + 1));
  out.residuals.push_back(rep.resid_next);
  out.splitting = sp;
  out.frame = frame;
  out.reports = st.reports;
  out.reports.push_back(rep);
  out.increases = rep.resid_next > rep.resid_Y ? st.increases + 1 : 0;
  if (out.increases >= 2)
    fail(ErrorKind::Divergence, "residual increased on two consecutive steps (step " + std::to_string(m) + ")");
  return out;
}

Ledger aposteriori_check(const models::Model& model, const TorusMap& K, const std::vector<double>& omega,
                         const AposterioriOptions& opt) {
  Ledger L;
  const double rho0 = opt.schedule.rho0, delta = opt.schedule.first_delta();
  TorusMap E = models::residual(model, K, omega);
  L.resid_Y = models::norm_Y(model, E, rho0);
  auto line = [&](const std::string& name, double v, double thr, bool pass, const std::string& note = "") {
    L.lines.push_back({name, v, thr, pass, note});
  };
  if (K.max_abs() == 0) {
    L.trivial = true;
    line("residual", L.resid_Y, 0, L.resid_Y == 0, "trivial torus");
    L.pass = L.resid_Y == 0;
    return L;
  }
  models::Fiber fib(model, K.kx());
  std::shared_ptr<hyperbolic::SplittingData> sp;
  try {
    sp = std::make_shared<hyperbolic::SplittingData>(hyperbolic::compute_splitting(model, K, omega.at(0), K.kx()));
  } catch (const Error& e) {
    line("splitting", 0, 0, false, std::string(to_string(e.kind())) + ": " + e.what());
    return L;
  }
  line("projection_defect", sp->proj_defect, opt.tau_proj, sp->proj_defect <= opt.tau_proj);
  line("invariance_defect", sp->invariance_defect, opt.tau_proj, sp->invariance_defect <= opt.tau_proj);
  if (opt.measure_rates) sp->rates = hyperbolic::rate_estimate(*sp, opt.rates);
  const auto& r = sp->rates;
  line("beta1", r.b1, 0, r.b1 > 0);
  line("beta2", r.b2, 0, r.b2 > 0);
  line("beta3_margin", std::min(r.b1, r.b2) - std::max(std::abs(r.b3p), std::abs(r.b3m)), 0,
       std::min(r.b1, r.b2) > std::max(std::abs(r.b3p), std::abs(r.b3m)));
  line("Ch", r.Ch, 0, std::isfinite(r.Ch));

  center::CenterFrame fr;
  try {
    fr = center::build_center_frame(model, K, *sp);
  } catch (const Error& e) {
    line("center_frame", 0, 0, false, std::string(to_string(e.kind())) + ": " + e.what());
    return L;
  }
  L.avgS_inv = fr.avgS_inv_norm;
  line("avgS_inv", fr.avgS_inv_norm, 0, std::isfinite(fr.avgS_inv_norm));
  auto dio = center::diophantine_estimate(omega, opt.nu, std::max(1, K.kt()));
  L.kappa_hat = dio.kappa_hat;
  line("kappa_hat", dio.kappa_hat, 0, std::isfinite(dio.kappa_hat));
  line("isotropy", fr.isotropy_norm, opt.isotropy_factor * L.resid_Y + 1e-14,
       fr.isotropy_norm <= opt.isotropy_factor * L.resid_Y + 1e-14);
  Eigen::MatrixXcd Eg = sp->grid.synth(fib.to_fiber(E));
  double ex = std::abs(center::exactness_average(fr, fib, hyperbolic::apply_projection(*sp, BundleKind::Center, Eg)));
  double ex_thr = 1e3 * std::pow(L.resid_Y, 1.5) + 1e-14;
  line("exactness", ex, ex_thr, ex <= ex_thr);

  Eigen::VectorXd wx = fib.weights_X(0);
  double pn = 0;
  for (BundleKind b : {BundleKind::Stable, BundleKind::Center, BundleKind::Unstable})
    pn = std::max(pn, hyperbolic::projection_norm(*sp, sp->projection(b), wx, wx, rho0));
  L.C = std::max(1.0, r.Ch) * pn;
  line("projection_norm", pn, 0, std::isfinite(pn));
  line("ball_radius", opt.ball_radius, 0, opt.ball_radius > 0, "polynomial field: any radius, heuristic r");
  const double a2 = fr.avgS_inv_norm * fr.avgS_inv_norm, k = dio.kappa_hat;
  L.smallness1 = L.C * a2 * std::pow(k, 4) * std::pow(delta, -4 * opt.nu) * L.resid_Y;
  L.smallness2 = L.C * a2 * k * k * std::pow(delta, -2 * opt.nu) * L.resid_Y;
  double emax = L.resid_Y > 0 ? L.resid_Y / L.smallness1 : std::numeric_limits<double>::infinity();
  line("residual", L.resid_Y, emax, L.smallness1 < 1);
  line("smallness1", L.smallness1, 1, L.smallness1 < 1);
  line("smallness2", L.smallness2, opt.ball_radius, L.smallness2 < opt.ball_radius);
  L.pass = true;
  for (const auto& l : L.lines) L.pass = L.pass && l.pass;
  return L;
}

QuadraticFit quadratic_fit(const std::vector<double>& res, double roundoff_floor) {
  QuadraticFit f;
  std::vector<double> d;
  for (size_t i = 0; i + 1 < res.size(); ++i)
    if (res[i] > 0 && res[i + 1] > roundoff_floor) d.push_back(std::log10(res[i + 1]) - 2 * std::log10(res[i]));
  f.pairs = static_cast<int>(d.size());
  if (d.empty()) return f;
  for (double x : d) f.c += x;
  f.c /= d.size();
  for (double x : d) f.max_dev = std::max(f.max_dev, std::abs(x - f.c));
  return f;
}

RunReport run(const models::Model& model, const TorusMap& K0, const std::vector<double>& omega,
              const NewtonOptions& opt, const NewtonState* resume) {
  RunReport rep;
  rep.omega = omega;
  if (opt.precheck && !resume) {
    AposterioriOptions ao;
    ao.schedule = opt.schedule;
    ao.nu = opt.nu;
    ao.tau_proj = opt.split.tau_proj;
    ao.measure_rates = opt.precheck_rates;
    rep.precheck = aposteriori_check(model, K0, omega, ao);
    if (!rep.precheck->pass && !rep.precheck->trivial) {
      if (!opt.force) fail(ErrorKind::PrecheckFailed, "a-posteriori precheck failed; use force to run anyway");
      rep.heuristic_override = true;
    }
  }
  NewtonState st = resume ? *resume : initial_state(model, K0, omega, opt.schedule);
  const double stop = std::max(opt.tol, opt.floor);
  while (true) {
    if (st.residuals.back() <= stop) {
      rep.converged = true;
      break;
    }
    if (st.m >= opt.max_iter) break;
    st = newton_step(model, st, opt);
    if (opt.on_step) opt.on_step(st);
  }
  rep.steps = st.reports;
  rep.residuals = st.residuals;
  rep.K_final = st.K;
  const TorusMap& Kstart = resume ? resume->K : K0;
  rep.distance_X = models::norm_X(model, rep.K_final - Kstart, opt.schedule.rho_inf());
  double C = rep.precheck ? rep.precheck->C : 1.0;
  double a = rep.steps.empty() ? 0.0 : rep.steps.front().avgS_inv;
  double k = rep.steps.empty() ? 0.0 : rep.steps.front().kappa_hat;
  rep.distance_bound = C * a * a * k * k * std::pow(opt.schedule.first_delta(), -2 * opt.nu) * rep.residuals.front();
  if (rep.K_final.l() == 1 && rep.K_final.max_abs() > 0)
    rep.final_isotropy = center::isotropy_defect(model, rep.K_final, rep.K_final.kx(), 4 * rep.K_final.kt() + 2).norm;
  auto q = quadratic_fit(rep.residuals);
  rep.quad_c = q.c;
  rep.quad_max_dev = q.max_dev;
  rep.quad_pairs = q.pairs;
  return rep;
}

Alignment phase_align(const models::Model& model, const TorusMap& K1, const TorusMap& K2, const AlignOptions& opt) {
  if (K1.l() != 1 || K2.l() != 1) fail(ErrorKind::Structural, "phase_align is implemented for l = 1");
  const int kt = std::max(K1.kt(), K2.kt()), kx = std::max(K1.kx(), K2.kx());
  TorusMap a = fourier::resize(K1, kt, kx), b = fourier::resize(K2, kt, kx);
  const auto sp = model.spaces();
  // z_k = sum_{c,j} w conj(b_k) a_k, misfit g(tau) = const - 2 Re sum_k e^{2 pi i k tau} z_k
  std::vector<cd> z(2 * kt + 1, 0.0);
  for (int k = -kt; k <= kt; ++k)
    for (int c = 0; c < 2; ++c)
      for (int j = -kx; j <= kx; ++j) {
        double w = std::exp(4 * pi * opt.rho * (std::abs(k) + std::abs(j))) * (std::pow(std::abs(j), 2 * sp.mX[c]) + 1);
        z[k + kt] += w * std::conj(b.get1(c, k, j)) * a.get1(c, k, j);
      }
  auto f = [&](double tau, int order) {
    double s = 0;
    for (int k = -kt; k <= kt; ++k) {
      cd e = std::polar(1.0, 2 * pi * k * tau) * z[k + kt];
      double fac = std::pow(2 * pi * k, order);
      cd ik = order % 4 == 0 ? cd(1, 0) : order % 4 == 1 ? cd(0, 1) : order % 4 == 2 ? cd(-1, 0) : cd(0, -1);
      s += (fac * ik * e).real();
    }
    return s;
  };
  const int ns = std::max(64, 16 * kt);
  double tau = 0, best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < ns; ++i) {
    double t = double(i) / ns, v = f(t, 0);
    if (v > best) {
      best = v;
      tau = t;
    }
  }
  Alignment al;
  bool conv = false;
  for (int it = 0; it < opt.max_iter; ++it) {
    double d1 = f(tau, 1), d2 = f(tau, 2);
    if (!(d2 < 0)) break;
    double step = -d1 / d2;
    tau += step;
    al.iterations = it + 1;
    if (std::abs(step) < 1e-15) {
      conv = true;
      break;
    }
  }
  tau -= std::floor(tau);
  al.tau = tau;
  al.distance = models::norm_X(model, b - fourier::phase_shift(a, {tau}), opt.rho);
  double nb = models::norm_X(model, b, opt.rho);
  al.relative = nb > 0 ? al.distance / nb : al.distance;
  if (!conv && al.distance > 0)
    fail(ErrorKind::AlignmentFailure, "phase Newton iteration did not converge");
  if (al.relative > opt.rel_tol)
    fail(ErrorKind::AlignmentFailure, "tori differ after alignment, relative distance " + std::to_string(al.relative));
  return al;
}

}  // namespace bsq::newton
