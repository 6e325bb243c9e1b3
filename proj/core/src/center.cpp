#include "bsq/center.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "bsq/error.hpp"

namespace bsq::center {

using std::numbers::pi;
using cd = std::complex<double>;

DiophantineReport diophantine_estimate(const std::vector<double>& omega, double nu, int kmax) {
  if (omega.empty()) fail(ErrorKind::Structural, "empty frequency vector");
  double on = 0;
  for (double w : omega) on = std::max(on, std::abs(w));
  if (on == 0) fail(ErrorKind::Resonant, "zero frequency vector");
  DiophantineReport r;
  r.omega = omega;
  r.nu = nu;
  r.kmax = kmax;
  TorusMap box(static_cast<int>(omega.size()), 1, kmax, 0);
  for (int ki = 0; ki < box.nk(); ++ki) {
    int a = box.kabs(ki);
    if (a == 0 || a > kmax) continue;
    auto k = box.kvec(ki);
    // skip -k, which gives the same divisor
    bool canonical = false;
    for (int c : k)
      if (c != 0) {
        canonical = c > 0;
        break;
      }
    if (!canonical) continue;
    long double dot = 0;
    for (size_t i = 0; i < k.size(); ++i) dot += static_cast<long double>(k[i]) * omega[i];
    double d = std::abs(static_cast<double>(dot));
    if (d <= 4 * std::numeric_limits<double>::epsilon() * on * a) {
      std::string ks;
      for (int c : k) ks += (ks.empty() ? "" : ",") + std::to_string(c);
      fail(ErrorKind::Resonant, "omega.k = 0 at k = (" + ks + ")");
    }
    double inv = 1.0 / (d * std::pow(double(a), nu));
    if (inv > r.kappa_hat) {
      r.kappa_hat = inv;
      r.argmax_k = k;
    }
  }
  return r;
}

TorusMap cohomology_solve(const TorusMap& h, const std::vector<double>& omega, double rho, double delta, double nu,
                          double tau_avg, CohomologyReport* rep) {
  if (static_cast<int>(omega.size()) != h.l()) fail(ErrorKind::Structural, "frequency length differs from l");
  TorusMap v(h.l(), h.d(), h.kt(), h.kx());
  double avg = 0;
  for (int c = 0; c < h.d(); ++c)
    for (int ki = 0; ki < h.nk(); ++ki) {
      auto k = h.kvec(ki);
      double kw = 0;
      for (size_t i = 0; i < k.size(); ++i) kw += k[i] * omega[i];
      for (int j = -h.kx(); j <= h.kx(); ++j) {
        cd x = h.at(c, ki, j);
        if (ki == h.zero_k()) {
          avg = std::max(avg, std::abs(x));
          continue;
        }
        if (x == 0.0) continue;
        if (kw == 0) fail(ErrorKind::Resonant, "exact resonance in the cohomology equation");
        v.at(c, ki, j) = x / cd(0.0, 2 * pi * kw);
      }
    }
  if (avg > tau_avg)
    fail(ErrorKind::Solvability, "cohomology right-hand side has average " + std::to_string(avg));
  fourier::refresh_parity(v);
  if (rep) {
    rep->avg_abs = avg;
    double nh = 0, nv = 0;
    for (int c = 0; c < h.d(); ++c) {
      nh += fourier::norm_rho_m(h, c, rho, 0);
      nv += fourier::norm_rho_m(v, c, rho - delta, 0);
    }
    rep->ratio = nh > 0 ? nv / nh : 0.0;
    rep->bound = diophantine_estimate(omega, nu, std::max(1, h.kt())).kappa_hat * std::pow(delta, -nu);
  }
  return v;
}

IsotropyReport isotropy_defect(const models::Model& model, const TorusMap& K, int kx, int ngrid) {
  if (K.l() != 1) fail(ErrorKind::Structural, "isotropy_defect is implemented for l = 1");
  models::Fiber fib(model, kx);
  grid::ThetaGrid g(ngrid);
  Eigen::MatrixXd DK = g.derivative(g.synth(fib.to_fiber(fourier::resize(K, std::min(K.kt(), g.kmax()), K.kx()))), 1.0).real();
  IsotropyReport r;
  r.L.resize(ngrid);
  for (int n = 0; n < ngrid; ++n) {
    Eigen::VectorXd x = DK.row(n).transpose();
    r.L[n] = Eigen::MatrixXd::Constant(1, 1, x.dot(fib.J() * x));
    r.norm = std::max(r.norm, std::abs(r.L[n](0, 0)));
  }
  return r;
}

CenterFrame build_center_frame(const models::Model& model, const TorusMap& K, const hyperbolic::SplittingData& sp,
                               const FrameOptions& opt) {
  if (sp.rank_c != 2) fail(ErrorKind::Structural, "the center frame is implemented for l = 1");
  models::Fiber fib(model, sp.kx);
  const auto& g = sp.grid;
  const int N = g.size(), D = fib.dim();
  if (K.kt() > g.kmax()) fail(ErrorKind::Structural, "torus has more theta modes than the splitting grid");
  CenterFrame f;
  f.n = N;
  f.omega = sp.omega;
  const Eigen::MatrixXd& Jm = fib.J();
  f.Gmet = Jm * fib.A0();
  f.Gmet = 0.5 * (f.Gmet + f.Gmet.transpose()).eval();
  if (f.Gmet(0, 0) < 0) f.Gmet = -f.Gmet;
  const Eigen::MatrixXd& G = f.Gmet;

  Eigen::MatrixXd DKg = g.derivative(g.synth(fib.to_fiber(K)), 1.0).real();
  f.DK.resize(N);
  f.DKc.resize(N);
  f.Q.resize(N);
  f.Jc.resize(N);
  f.W2.resize(N);
  f.Nmat.resize(N);
  const int su = fib.slot(0, 1), sv = fib.slot(1, 1);
  for (int n = 0; n < N; ++n) {
    f.DK[n] = DKg.row(n).transpose();
    f.DKc[n] = sp.Pc[n] * f.DK[n];
    Eigen::MatrixXd B0(D, 2);
    B0.col(0) = sp.Pc[n].col(su);
    B0.col(1) = sp.Pc[n].col(sv);
    Eigen::LLT<Eigen::MatrixXd> llt(B0.transpose() * G * B0);
    if (llt.info() != Eigen::Success) fail(ErrorKind::Geometry, "energy form is not definite on the center bundle");
    Eigen::Matrix2d Lt = llt.matrixL().transpose();
    f.Q[n] = B0 * Lt.inverse();
    f.Jc[n] = f.Q[n].transpose() * Jm * f.Q[n];
    if (std::abs(f.Jc[n](0, 1)) < opt.geometry_tol)
      fail(ErrorKind::Geometry, "symplectic form degenerates on the center bundle");
    Eigen::Vector2d d = f.Q[n].transpose() * G * f.DKc[n];
    double dd = d.squaredNorm();
    if (!(dd > 0)) fail(ErrorKind::DegenerateEmbedding, "DK vanishes on the center bundle");
    f.Nmat[n] = 1.0 / dd;
    f.W2[n] = f.Q[n] * (f.Jc[n].inverse() * d) * f.Nmat[n];
  }
  auto field_deriv = [&](const std::vector<Eigen::VectorXd>& v) {
    Eigen::MatrixXcd m(N, D);
    for (int n = 0; n < N; ++n) m.row(n) = v[n].transpose().cast<cd>();
    Eigen::MatrixXd dm = g.derivative(m, sp.omega).real();
    std::vector<Eigen::VectorXd> out(N);
    for (int n = 0; n < N; ++n) out[n] = dm.row(n).transpose();
    return out;
  };
  auto dW2 = field_deriv(f.W2), dDK = field_deriv(f.DKc);
  f.LW2.resize(N);
  f.LDK.resize(N);
  f.S.resize(N);
  f.mc.resize(N);
  f.Bred.resize(N);
  for (int n = 0; n < N; ++n) {
    Eigen::MatrixXd A = sp.A.eval(g.theta(n)).real();
    f.LW2[n] = dW2[n] - A * f.W2[n];
    f.LDK[n] = dDK[n] - A * f.DKc[n];
    f.S[n] = f.Nmat[n] * f.DKc[n].dot(G * f.LW2[n]);
    Eigen::MatrixXd QG = f.Q[n].transpose() * G;
    f.mc[n].col(0) = QG * f.DKc[n];
    f.mc[n].col(1) = QG * f.W2[n];
    Eigen::Matrix2d L;
    L.col(0) = QG * f.LDK[n];
    L.col(1) = QG * f.LW2[n];
    f.Bred[n] = f.mc[n].inverse() * L;
    f.e1 = std::max(f.e1, f.Bred[n].col(0).cwiseAbs().maxCoeff());
    f.e2 = std::max({f.e2, std::abs(f.Bred[n](1, 1)), std::abs(f.Bred[n](0, 1) - f.S[n])});
    Eigen::Matrix2d MJM = f.mc[n].transpose() * f.Jc[n] * f.mc[n];
    Eigen::Matrix2d ref;
    ref << 0, 1, -1, 0;
    f.MtJM_defect = std::max(f.MtJM_defect, (MJM - ref).cwiseAbs().maxCoeff());
    f.isotropy_norm = std::max(f.isotropy_norm, std::abs(f.DK[n].dot(Jm * f.DK[n])));
  }
  Eigen::MatrixXcd b22(N, 1);
  for (int n = 0; n < N; ++n) b22(n, 0) = f.Bred[n](1, 1);
  Eigen::RowVectorXcd bavg;
  Eigen::MatrixXcd B = g.cohomology(b22, sp.omega, &bavg);
  f.b22_avg = bavg(0).real();
  if (std::abs(f.b22_avg) > opt.b22_avg_tol)
    fail(ErrorKind::Geometry, "center block has a nonzero Floquet exponent " + std::to_string(f.b22_avg));
  f.expB.resize(N);
  double acc = 0;
  for (int n = 0; n < N; ++n) {
    f.expB[n] = std::exp(-B(n, 0).real());
    acc += f.S[n] * f.expB[n];
  }
  f.avgS = acc / N;
  if (std::abs(f.avgS) < opt.twist_tol) fail(ErrorKind::Twist, "avg(S) is singular");
  f.avgS_inv_norm = 1.0 / std::abs(f.avgS);
  return f;
}

CenterSolution solve_center(const CenterFrame& f, const hyperbolic::SplittingData& sp, const Eigen::MatrixXcd& F,
                            const CenterSolveOptions& opt) {
  const auto& g = sp.grid;
  const int N = f.n;
  Eigen::MatrixXcd p(N, 2);
  for (int n = 0; n < N; ++n) {
    Eigen::VectorXd Fn = F.row(n).real().transpose();
    p.row(n) = (f.mc[n].inverse() * (f.Q[n].transpose() * f.Gmet * Fn)).transpose().cast<cd>();
  }
  CenterSolution s;
  Eigen::MatrixXcd q2(N, 1);
  for (int n = 0; n < N; ++n) q2(n, 0) = p(n, 1).real() / f.expB[n];
  Eigen::RowVectorXcd avg2;
  Eigen::MatrixXcd eta = g.cohomology(q2, f.omega, &avg2);
  s.exactness_defect = std::abs(avg2(0));
  double thr = opt.exactness_factor * std::pow(opt.residual_norm, 1.5) + opt.tau_avg;
  if (opt.residual_norm > 0 && s.exactness_defect > thr)
    fail(ErrorKind::Geometry, "exactness defect " + std::to_string(s.exactness_defect) + " above threshold");
  double avgSx = 0, avgp1 = 0;
  for (int n = 0; n < N; ++n) {
    avgSx += f.S[n] * f.expB[n] * eta(n, 0).real();
    avgp1 += p(n, 0).real();
  }
  avgSx /= N;
  avgp1 /= N;
  double c = (avgp1 - avgSx) / f.avgS;
  s.avg_xi2 = c;
  s.xi2.resize(N);
  Eigen::MatrixXcd r1(N, 1);
  for (int n = 0; n < N; ++n) {
    s.xi2[n] = f.expB[n] * (eta(n, 0).real() + c);
    r1(n, 0) = p(n, 0).real() - f.S[n] * s.xi2[n];
  }
  Eigen::MatrixXcd xi1 = g.cohomology(r1, f.omega, nullptr);
  s.xi1.resize(N);
  s.W.resize(N, sp.dim());
  for (int n = 0; n < N; ++n) {
    s.xi1[n] = xi1(n, 0).real();
    s.W.row(n) = (f.DKc[n] * s.xi1[n] + f.W2[n] * s.xi2[n]).transpose().cast<cd>();
  }
  return s;
}

double exactness_average(const CenterFrame& f, const models::Fiber& fiber, const Eigen::MatrixXcd& F) {
  double acc = 0;
  for (int n = 0; n < f.n; ++n) acc += f.DKc[n].dot(fiber.J() * F.row(n).real().transpose());
  return acc / f.n;
}

}  // namespace bsq::center
