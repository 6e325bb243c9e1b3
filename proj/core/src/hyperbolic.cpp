#include "bsq/hyperbolic.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "bsq/error.hpp"
#include "bsq/parallel.hpp"

namespace bsq::hyperbolic {

using std::numbers::pi;
using cd = std::complex<double>;

Eigen::MatrixXcd GalerkinOperator::perturbation(double theta) const {
  const int D = dim();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(D, D);
  for (int k = -kb; k <= kb; ++k) out += std::polar(1.0, 2 * pi * k * theta) * B[k + kb];
  return out;
}

Eigen::MatrixXcd GalerkinOperator::eval(double theta) const {
  Eigen::MatrixXcd out = perturbation(theta);
  out += A0.cast<cd>();
  return out;
}

double GalerkinOperator::perturbation_norm(const models::Fiber& fiber, double rho) const {
  Eigen::VectorXd wx = fiber.weights_X(rho), wy = fiber.weights_Y(rho);
  std::vector<double> terms;
  for (int k = -kb; k <= kb; ++k) {
    Eigen::MatrixXcd s = wy.asDiagonal() * B[k + kb] * wx.cwiseInverse().asDiagonal();
    if (s.cwiseAbs().maxCoeff() == 0) continue;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s);
    terms.push_back(std::exp(2 * pi * rho * std::abs(k)) * svd.singularValues()(0));
  }
  return fourier::neumaier_sum(terms);
}

namespace {

GalerkinOperator linearize_impl(const models::Model& model, const TorusMap& K, int kx, bool linear_part) {
  if (K.l() != 1) fail(ErrorKind::Structural, "the splitting is implemented for l = 1");
  models::Fiber fib(model, kx);
  GalerkinOperator op;
  op.kx = kx;
  op.kb = K.kt();
  const int D = fib.dim();
  op.A0 = linear_part ? fib.A0() : Eigen::MatrixXd::Zero(D, D);
  op.B.assign(2 * op.kb + 1, Eigen::MatrixXcd::Zero(D, D));
  std::vector<Eigen::MatrixXcd> cols(D);
  parallel::parallel_for(D, [&](int col) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(D);
    e(col) = 1.0;
    TorusMap w = fib.slice(e);
    TorusMap out = model.dnonlinearity(K, w);
    cols[col] = fib.to_fiber(out);
  });
  for (int col = 0; col < D; ++col) {
    const int K2 = (static_cast<int>(cols[col].rows()) - 1) / 2;
    for (int k = -std::min(K2, op.kb); k <= std::min(K2, op.kb); ++k) op.B[k + op.kb].col(col) = cols[col].row(k + K2).transpose();
  }
  return op;
}

}  // namespace

GalerkinOperator linearize(const models::Model& model, const TorusMap& K, int kx) {
  return linearize_impl(model, K, kx, true);
}

GalerkinOperator linearize_perturbation(const models::Model& model, const TorusMap& P, int kx) {
  return linearize_impl(model, P, kx, false);
}

std::vector<int> EigenBasis::slots(char c) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(cls.size()); ++i)
    if (cls[i] == c) out.push_back(i);
  return out;
}

EigenBasis eigen_basis(const models::Fiber& fiber) {
  const int kx = fiber.kx(), D = fiber.dim();
  EigenBasis e;
  e.V = Eigen::MatrixXcd::Zero(D, D);
  e.lambda = Eigen::VectorXcd::Zero(D);
  e.cls.assign(D, 'c');
  for (int j = 1; j <= kx; ++j) {
    Eigen::Matrix2d b = fiber.model().fiber_block(j);
    double s2 = b(0, 1) * b(1, 0);
    if (s2 == 0) fail(ErrorKind::DegenerateParameter, "zero eigenvalue at j = " + std::to_string(j));
    int iu = fiber.slot(0, j), iv = fiber.slot(1, j);
    bool hyp = s2 > 0;
    double s = std::sqrt(std::abs(s2));
    for (int sg : {1, -1}) {
      int slot = sg > 0 ? iu : iv;
      cd lam = hyp ? cd(sg * s, 0.0) : cd(0.0, sg * s);
      Eigen::Vector2cd v(b(0, 1), lam);
      v /= v.norm();
      e.V(iu, slot) = v(0);
      e.V(iv, slot) = v(1);
      e.lambda(slot) = lam;
      e.cls[slot] = hyp ? (sg > 0 ? 'u' : 's') : 'c';
    }
  }
  e.Vinv = e.V.inverse();
  return e;
}

const char* to_string(BundleKind b) {
  switch (b) {
    case BundleKind::Stable: return "stable";
    case BundleKind::Center: return "center";
    case BundleKind::Unstable: return "unstable";
  }
  return "?";
}

char bundle_char(BundleKind b) {
  switch (b) {
    case BundleKind::Stable: return 's';
    case BundleKind::Center: return 'c';
    case BundleKind::Unstable: return 'u';
  }
  return '?';
}

Eigen::MatrixXcd Bundle::generator(double theta) const {
  return grid::eval_matrix_series(red_hat, rank(), rank(), theta);
}

Eigen::MatrixXcd Bundle::graph(double theta) const {
  return grid::eval_matrix_series(M_hat, static_cast<int>(cidx.size()), rank(), theta);
}

const Bundle& SplittingData::bundle(BundleKind b) const {
  switch (b) {
    case BundleKind::Stable: return s;
    case BundleKind::Center: return c;
    default: return u;
  }
}

const std::vector<Eigen::MatrixXd>& SplittingData::projection(BundleKind b) const {
  switch (b) {
    case BundleKind::Stable: return Ps;
    case BundleKind::Center: return Pc;
    default: return Pu;
  }
}

namespace {

// Fixed-point iteration of the invariance equation
// omega dM = Lambda_b M - M Lambda_a + B_ba + B_bb M - M B_aa - M B_ab M.
void solve_graph(Bundle& bd, const EigenBasis& eig, const std::vector<Eigen::MatrixXcd>& Bt,
                 const grid::ThetaGrid& g, double omega, const SplittingOptions& opt, const Bundle* warm) {
  const int N = g.size(), K = g.kmax();
  const int na = static_cast<int>(bd.idx.size()), nb = static_cast<int>(bd.cidx.size());
  std::vector<Eigen::MatrixXcd> Baa(N), Bab(N), Bba(N), Bbb(N);
  for (int n = 0; n < N; ++n) {
    Baa[n] = Bt[n](bd.idx, bd.idx);
    Bab[n] = Bt[n](bd.idx, bd.cidx);
    Bba[n] = Bt[n](bd.cidx, bd.idx);
    Bbb[n] = Bt[n](bd.cidx, bd.cidx);
  }
  Eigen::MatrixXcd den(2 * K + 1, nb * na);
  for (int k = -K; k <= K; ++k)
    for (int q = 0; q < na; ++q)
      for (int p = 0; p < nb; ++p)
        den(k + K, p + q * nb) = cd(0.0, 2 * pi * k * omega) - eig.lambda(bd.cidx[p]) + eig.lambda(bd.idx[q]);

  if (warm && static_cast<int>(warm->M.size()) == N)
    bd.M = warm->M;
  else
    bd.M.assign(N, Eigen::MatrixXcd::Zero(nb, na));

  double d = 0, dprev = 0;
  bd.contraction = 0;
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    std::vector<Eigen::MatrixXcd> R(N);
    for (int n = 0; n < N; ++n) {
      const auto& M = bd.M[n];
      R[n] = Bba[n] + Bbb[n] * M - M * Baa[n] - M * Bab[n] * M;
    }
    Eigen::MatrixXcd Rh = g.anal(grid::pack(R));
    Rh.array() /= den.array();
    auto Mn = grid::unpack(g.synth(Rh), nb, na);
    d = 0;
    double scale = 1;
    for (int n = 0; n < N; ++n) {
      d = std::max(d, (Mn[n] - bd.M[n]).cwiseAbs().maxCoeff());
      scale = std::max(scale, Mn[n].cwiseAbs().maxCoeff());
    }
    bd.M = std::move(Mn);
    if (it > 0 && dprev > 0) bd.contraction = d / dprev;
    if (d <= 1e-15 * scale) break;
    if (it > 3 && d >= 0.9 * dprev && d <= opt.tau_fp) break;
    if (it > 3 && d > dprev && d > opt.tau_fp && bd.contraction >= 1)
      fail(ErrorKind::PerturbationTooLarge, std::string("graph iteration diverges for the ") + to_string(bd.kind) +
                                                " bundle (contraction " + std::to_string(bd.contraction) + ")");
    dprev = d;
  }
  bd.iterations = it + 1;
  bd.fp_residual = d;
  if (d > opt.tau_fp)
    fail(ErrorKind::PerturbationTooLarge, std::string("graph iteration did not converge for the ") +
                                              to_string(bd.kind) + " bundle");
  bd.red.resize(N);
  Eigen::MatrixXcd La = eig.lambda(bd.idx).asDiagonal();
  for (int n = 0; n < N; ++n) bd.red[n] = La + Baa[n] + Bab[n] * bd.M[n];
  bd.red_hat = g.anal(grid::pack(bd.red));
  bd.M_hat = g.anal(grid::pack(bd.M));
}

void build_projections(SplittingData& sp) {
  const int N = sp.grid.size(), D = sp.dim();
  sp.Ps.resize(N);
  sp.Pc.resize(N);
  sp.Pu.resize(N);
  for (int n = 0; n < N; ++n) {
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(D, D);
    for (const Bundle* b : {&sp.s, &sp.c, &sp.u}) {
      for (int q = 0; q < b->rank(); ++q) {
        P(b->idx[q], b->idx[q]) = 1.0;
        for (int p = 0; p < static_cast<int>(b->cidx.size()); ++p) P(b->cidx[p], b->idx[q]) = b->M[n](p, q);
      }
    }
    Eigen::MatrixXcd Pinv = P.partialPivLu().inverse();
    for (const Bundle* b : {&sp.s, &sp.c, &sp.u}) {
      Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(D, D);
      for (int i : b->idx) E(i, i) = 1.0;
      Eigen::MatrixXd pr = (sp.eig.V * P * E * Pinv * sp.eig.Vinv).real();
      if (b->kind == BundleKind::Stable) sp.Ps[n] = pr;
      if (b->kind == BundleKind::Center) sp.Pc[n] = pr;
      if (b->kind == BundleKind::Unstable) sp.Pu[n] = pr;
    }
  }
}

Bundle make_bundle(BundleKind kind, const EigenBasis& eig) {
  Bundle b;
  b.kind = kind;
  char c = bundle_char(kind);
  for (int i = 0; i < static_cast<int>(eig.cls.size()); ++i) (eig.cls[i] == c ? b.idx : b.cidx).push_back(i);
  return b;
}

Eigen::VectorXd scale_weights(const SplittingData& sp) {
  // X-type weights at rho = 0 make the projections uniformly bounded in j
  Eigen::VectorXd w(sp.dim());
  const int kx = sp.kx;
  for (int j = 1; j <= kx; ++j) {
    // balances the two entries of the eigenvectors (b01, +-sigma)
    Eigen::Matrix2d b = sp.model->fiber_block(j);
    double s = std::sqrt(std::abs(b(0, 1) * b(1, 0)));
    w(j - 1) = 1.0;
    w(kx + j - 1) = std::abs(b(0, 1)) / std::max(s, 1e-300);
  }
  return w;
}

SplittingData assemble(const models::Model& model, GalerkinOperator A, double omega, const SplittingOptions& opt,
                       const SplittingData* warm) {
  SplittingData sp;
  sp.model = &model;
  sp.kx = A.kx;
  sp.omega = omega;
  int n = opt.grid_size > 0 ? opt.grid_size : 4 * A.kb + 2;
  n = std::max(n, 2);
  if (warm && warm->grid.size() == n) n = warm->grid.size();
  sp.grid = grid::ThetaGrid(n);
  models::Fiber fib(model, A.kx);
  sp.eig = warm ? warm->eig : eigen_basis(fib);
  sp.A = std::move(A);
  const int N = sp.grid.size();
  std::vector<Eigen::MatrixXcd> Bt(N);
  parallel::parallel_for(N, [&](int i) { Bt[i] = sp.eig.Vinv * sp.A.perturbation(sp.grid.theta(i)) * sp.eig.V; });
  sp.s = make_bundle(BundleKind::Stable, sp.eig);
  sp.c = make_bundle(BundleKind::Center, sp.eig);
  sp.u = make_bundle(BundleKind::Unstable, sp.eig);
  sp.rank_c = sp.c.rank();
  for (Bundle* b : {&sp.s, &sp.c, &sp.u}) {
    const Bundle* w = warm ? &warm->bundle(b->kind) : nullptr;
    solve_graph(*b, sp.eig, Bt, sp.grid, omega, opt, w);
  }
  build_projections(sp);
  sp.proj_defect = projection_defect(sp);
  sp.invariance_defect = invariance_defect(sp);
  sp.strip_width = fit_strip_width(sp);
  // rates of the constant part: refined by rate_estimate
  double bmin = std::numeric_limits<double>::infinity();
  for (int i : sp.s.idx) bmin = std::min(bmin, -sp.eig.lambda(i).real());
  sp.rates.b1 = sp.rates.b2 = bmin;
  sp.rates.a1 = sp.rates.a2 = 0.5;
  if (sp.proj_defect > opt.tau_proj)
    fail(ErrorKind::NoDichotomy, "projection defect " + std::to_string(sp.proj_defect) + " above tolerance");
  return sp;
}

}  // namespace

SplittingData unperturbed_splitting(const models::Model& model, int kx, double omega, int kt) {
  TorusMap zero(1, 2, kt, kx);
  SplittingOptions opt;
  opt.grid_size = std::max(4 * kt + 2, 2);
  return assemble(model, linearize(model, zero, kx), omega, opt, nullptr);
}

SplittingData compute_splitting(const models::Model& model, const TorusMap& K, double omega, int kx,
                                const SplittingOptions& opt) {
  return assemble(model, linearize(model, K, kx), omega, opt, nullptr);
}

SplittingData graph_transform_update(const SplittingData& base, const GalerkinOperator& A_new,
                                     const SplittingOptions& opt) {
  if (A_new.kx != base.kx) fail(ErrorKind::Structural, "graph update needs the same Galerkin truncation");
  SplittingOptions o = opt;
  if (o.grid_size == 0) o.grid_size = base.grid.size();
  return assemble(*base.model, A_new, base.omega, o, &base);
}

Eigen::MatrixXcd frame_at(const SplittingData& sp, double theta) {
  const int D = sp.dim();
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(D, D);
  for (const Bundle* b : {&sp.s, &sp.c, &sp.u}) {
    Eigen::MatrixXcd M = b->graph(theta);
    for (int q = 0; q < b->rank(); ++q) {
      P(b->idx[q], b->idx[q]) = 1.0;
      for (int p = 0; p < static_cast<int>(b->cidx.size()); ++p) P(b->cidx[p], b->idx[q]) = M(p, q);
    }
  }
  return P;
}

Eigen::MatrixXcd embedding_at(const SplittingData& sp, BundleKind b, double theta) {
  const Bundle& bd = sp.bundle(b);
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(sp.dim(), bd.rank());
  Eigen::MatrixXcd M = bd.graph(theta);
  for (int q = 0; q < bd.rank(); ++q) {
    G(bd.idx[q], q) = 1.0;
    for (int p = 0; p < static_cast<int>(bd.cidx.size()); ++p) G(bd.cidx[p], q) = M(p, q);
  }
  return sp.eig.V * G;
}

Eigen::MatrixXcd reduction_at(const SplittingData& sp, BundleKind b, double theta) {
  Eigen::MatrixXcd Pi = frame_at(sp, theta).partialPivLu().inverse() * sp.eig.Vinv;
  return Pi(sp.bundle(b).idx, Eigen::all);
}

Eigen::MatrixXd projection_at(const SplittingData& sp, BundleKind b, double theta) {
  return (embedding_at(sp, b, theta) * reduction_at(sp, b, theta)).real();
}

double projection_defect(const SplittingData& sp) {
  const int N = sp.grid.size(), D = sp.dim();
  Eigen::VectorXd w = scale_weights(sp);
  Eigen::MatrixXd W = w.asDiagonal(), Wi = w.cwiseInverse().asDiagonal();
  double worst = 0;
  for (int n = 0; n < N; ++n) {
    const Eigen::MatrixXd* P[3] = {&sp.Ps[n], &sp.Pc[n], &sp.Pu[n]};
    Eigen::MatrixXd S[3];
    for (int a = 0; a < 3; ++a) S[a] = W * *P[a] * Wi;
    Eigen::MatrixXd sum = S[0] + S[1] + S[2] - Eigen::MatrixXd::Identity(D, D);
    worst = std::max(worst, sum.cwiseAbs().maxCoeff());
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        Eigen::MatrixXd r = S[a] * S[b];
        if (a == b) r -= S[a];
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
  }
  return worst;
}

double invariance_defect(const SplittingData& sp) {
  const int N = sp.grid.size(), D = sp.dim();
  Eigen::VectorXd w = scale_weights(sp);
  Eigen::MatrixXd W = w.asDiagonal(), Wi = w.cwiseInverse().asDiagonal();
  double worst = 0, ascale = 0;
  std::vector<Eigen::MatrixXd> A(N);
  for (int n = 0; n < N; ++n) {
    A[n] = sp.A.eval(sp.grid.theta(n)).real();
    ascale = std::max(ascale, (W * A[n] * Wi).cwiseAbs().maxCoeff());
  }
  for (const auto* P : {&sp.Ps, &sp.Pc, &sp.Pu}) {
    std::vector<Eigen::MatrixXcd> pc(N);
    for (int n = 0; n < N; ++n) pc[n] = (*P)[n].cast<cd>();
    auto dP = grid::unpack(sp.grid.derivative(grid::pack(pc), sp.omega), D, D);
    for (int n = 0; n < N; ++n) {
      Eigen::MatrixXd r = dP[n].real() - (A[n] * (*P)[n] - (*P)[n] * A[n]);
      worst = std::max(worst, (W * r * Wi).cwiseAbs().maxCoeff());
    }
  }
  return worst / std::max(ascale, 1.0);
}

double fit_strip_width(const SplittingData& sp) {
  const int N = sp.grid.size(), K = sp.grid.kmax();
  Eigen::VectorXd w = scale_weights(sp);
  std::vector<Eigen::MatrixXcd> pc(N);
  for (int n = 0; n < N; ++n) pc[n] = (w.asDiagonal() * sp.Pc[n] * w.cwiseInverse().asDiagonal()).cast<cd>();
  Eigen::MatrixXcd h = sp.grid.anal(grid::pack(pc));
  double c0 = h.row(K).cwiseAbs().maxCoeff();
  std::vector<double> xs, ys;
  for (int k = 1; k <= K; ++k) {
    double a = std::max(h.row(K + k).cwiseAbs().maxCoeff(), h.row(K - k).cwiseAbs().maxCoeff());
    if (a <= 1e-13 * std::max(c0, 1.0)) break;
    xs.push_back(k);
    ys.push_back(std::log(a));
  }
  if (xs.size() < 2) return std::numeric_limits<double>::infinity();
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= xs.size();
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  double slope = sxy / sxx;
  return slope < 0 ? -slope / (2 * pi) : 0.0;
}

Eigen::MatrixXcd apply_projection(const SplittingData& sp, BundleKind b, const Eigen::MatrixXcd& F) {
  const auto& P = sp.projection(b);
  Eigen::MatrixXcd out(F.rows(), F.cols());
  for (Eigen::Index n = 0; n < F.rows(); ++n) out.row(n) = F.row(n) * P[n].transpose();
  return out;
}

namespace {

// reduced right-hand side f = (V^{-1} Pi^a F)_a on the grid
Eigen::MatrixXcd reduce_rhs(const SplittingData& sp, const Bundle& bd, const Eigen::MatrixXcd& F) {
  Eigen::MatrixXcd PF = apply_projection(sp, bd.kind, F);
  Eigen::MatrixXcd f(F.rows(), bd.rank());
  for (Eigen::Index n = 0; n < F.rows(); ++n) {
    Eigen::VectorXcd y = sp.eig.Vinv * PF.row(n).transpose();
    f.row(n) = y(bd.idx).transpose();
  }
  return f;
}

// Delta = V [I; M] delta
Eigen::MatrixXcd lift(const SplittingData& sp, const Bundle& bd, const Eigen::MatrixXcd& delta) {
  const int N = sp.grid.size(), D = sp.dim();
  Eigen::MatrixXcd out(N, D);
  for (int n = 0; n < N; ++n) {
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(D);
    Eigen::VectorXcd d = delta.row(n).transpose();
    y(bd.idx) = d;
    y(bd.cidx) = bd.M[n] * d;
    out.row(n) = (sp.eig.V * y).transpose();
  }
  return out;
}

Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) { return a.exp(); }

constexpr double kC1 = 0.5 - 0.28867513459481288225;  // 1/2 - sqrt(3)/6
constexpr double kC2 = 0.5 + 0.28867513459481288225;
constexpr double kM4 = 0.14433756729740644113;        // sqrt(3)/12

struct TanhSinh {
  std::vector<double> x, w;
};

TanhSinh tanh_sinh(double T, double h) {
  TanhSinh q;
  const double tmax = 3.5;
  for (int i = -static_cast<int>(tmax / h); i <= static_cast<int>(tmax / h); ++i) {
    double t = i * h;
    double u = 0.5 * pi * std::sinh(t);
    double ch = std::cosh(u);
    double x = 0.5 * T * (1 + std::tanh(u));
    double w = 0.5 * T * h * 0.5 * pi * std::cosh(t) / (ch * ch);
    if (!(x > 0) || !(x < T) || w < 1e-300) continue;
    q.x.push_back(x);
    q.w.push_back(w);
  }
  return q;
}

std::vector<Eigen::MatrixXcd> duhamel(const SplittingData& sp, const Bundle& bd,
                                      const std::vector<Eigen::MatrixXcd>& Fs, const QuadratureOptions& qo) {
  const bool stable = bd.kind == BundleKind::Stable;
  if (bd.kind == BundleKind::Center) fail(ErrorKind::Direction, "the center bundle has no Duhamel solve");
  const int N = sp.grid.size(), na = bd.rank(), R = static_cast<int>(Fs.size());
  double beta = std::numeric_limits<double>::infinity();
  for (int i : bd.idx) beta = std::min(beta, std::abs(sp.eig.lambda(i).real()));
  beta = std::min(beta, stable ? sp.rates.b1 : sp.rates.b2);
  if (!(beta > 0)) fail(ErrorKind::NoDichotomy, "bundle rate is not positive");
  const double T = -std::log(qo.tau_tail) / beta;
  TanhSinh q = tanh_sinh(T, qo.level_h);

  // reduced right-hand sides, all batched into one coefficient table
  Eigen::MatrixXcd fall(N, na * R);
  for (int r = 0; r < R; ++r) fall.middleCols(r * na, na) = reduce_rhs(sp, bd, Fs[r]);
  Eigen::MatrixXcd fhat = sp.grid.anal(fall);
  const double om = sp.omega;
  const double sgn = stable ? -1.0 : 1.0;  // f evaluated at theta + sgn omega tau

  std::vector<Eigen::MatrixXcd> res(N);
  parallel::parallel_for(N, [&](int n) {
    const double th = sp.grid.theta(n);
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(na, na);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(na, R);
    double tau = 0;
    for (size_t iq = 0; iq < q.x.size(); ++iq) {
      double target = q.x[iq];
      double span = target - tau;
      int ns = std::max(1, static_cast<int>(std::ceil(span / qo.max_substep)));
      double h = span / ns;
      for (int s = 0; s < ns; ++s) {
        double t0 = tau + s * h;
        Eigen::MatrixXcd L1 = bd.generator(th + sgn * om * (t0 + kC1 * h));
        Eigen::MatrixXcd L2 = bd.generator(th + sgn * om * (t0 + kC2 * h));
        Eigen::MatrixXcd Om;
        if (stable)
          Om = 0.5 * h * (L1 + L2) + kM4 * h * h * (L1 * L2 - L2 * L1);
        else
          Om = -0.5 * h * (L1 + L2) + kM4 * h * h * (L1 * L2 - L2 * L1);
        U = U * expm(Om);
      }
      tau = target;
      Eigen::RowVectorXcd fv = grid::eval_series(fhat, th + sgn * om * tau);
      Eigen::MatrixXcd fm = Eigen::Map<const Eigen::MatrixXcd>(fv.data(), na, R);
      acc += q.w[iq] * (U * fm);
    }
    res[n] = stable ? acc : Eigen::MatrixXcd(-acc);
  });
  std::vector<Eigen::MatrixXcd> out(R);
  for (int r = 0; r < R; ++r) {
    Eigen::MatrixXcd delta(N, na);
    for (int n = 0; n < N; ++n) delta.row(n) = res[n].col(r).transpose();
    out[r] = lift(sp, bd, delta);
  }
  return out;
}

}  // namespace

Eigen::MatrixXcd solve_hyperbolic_direct(const SplittingData& sp, BundleKind b, const Eigen::MatrixXcd& F) {
  if (b == BundleKind::Center) fail(ErrorKind::Direction, "the direct hyperbolic solve needs s or u");
  const Bundle& bd = sp.bundle(b);
  const int na = bd.rank(), Kg = sp.grid.kmax(), Kd = Kg / 2, nk = 2 * Kd + 1;
  if (na == 0) return Eigen::MatrixXcd::Zero(F.rows(), F.cols());
  Eigen::MatrixXcd fh = sp.grid.anal(reduce_rhs(sp, bd, F), Kd);
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(nk * na, nk * na);
  for (int a = 0; a < nk; ++a)
    for (int c = 0; c < nk; ++c) {
      int d = a - c;
      Eigen::RowVectorXcd row = bd.red_hat.row(d + Kg);
      Eigen::MatrixXcd m = -Eigen::Map<const Eigen::MatrixXcd>(row.data(), na, na);
      if (a == c) m += cd(0.0, 2 * pi * (a - Kd) * sp.omega) * Eigen::MatrixXcd::Identity(na, na);
      L.block(a * na, c * na, na, na) = m;
    }
  Eigen::VectorXcd rhs(nk * na);
  for (int a = 0; a < nk; ++a) rhs.segment(a * na, na) = fh.row(a).transpose();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(L);
  if (!(lu.rcond() > 1e-14)) fail(ErrorKind::TruncationResonance, "singular truncated hyperbolic system; increase k_theta");
  Eigen::VectorXcd x = lu.solve(rhs);
  Eigen::MatrixXcd xh(nk, na);
  for (int a = 0; a < nk; ++a) xh.row(a) = x.segment(a * na, na).transpose();
  return lift(sp, bd, sp.grid.synth(xh));
}

Eigen::MatrixXcd solve_stable(const SplittingData& sp, const Eigen::MatrixXcd& F, const QuadratureOptions& q) {
  return duhamel(sp, sp.s, {F}, q)[0];
}

Eigen::MatrixXcd solve_unstable(const SplittingData& sp, const Eigen::MatrixXcd& F, const QuadratureOptions& q) {
  return duhamel(sp, sp.u, {F}, q)[0];
}

std::vector<Eigen::MatrixXcd> solve_duhamel_batch(const SplittingData& sp, BundleKind b,
                                                  const std::vector<Eigen::MatrixXcd>& F, const QuadratureOptions& q) {
  return duhamel(sp, sp.bundle(b), F, q);
}

double fiber_norm(const Eigen::MatrixXcd& rows, const Eigen::VectorXd& w, double rho) {
  const int K = (static_cast<int>(rows.rows()) - 1) / 2;
  std::vector<double> terms;
  terms.reserve(rows.rows());
  for (int k = -K; k <= K; ++k)
    terms.push_back(std::exp(2 * pi * rho * std::abs(k)) * rows.row(k + K).cwiseProduct(w.transpose().cast<cd>()).norm());
  return fourier::neumaier_sum(terms);
}

double grid_field_norm(const SplittingData& sp, const Eigen::MatrixXcd& F, const Eigen::VectorXd& w, double rho) {
  return fiber_norm(sp.grid.anal(F), w, rho);
}

double projection_norm(const SplittingData& sp, const std::vector<Eigen::MatrixXd>& P, const Eigen::VectorXd& w_out,
                       const Eigen::VectorXd& w_in, double rho) {
  const int N = sp.grid.size(), K = sp.grid.kmax(), D = sp.dim();
  std::vector<Eigen::MatrixXcd> pc(N);
  for (int n = 0; n < N; ++n) pc[n] = (w_out.asDiagonal() * P[n] * w_in.cwiseInverse().asDiagonal()).cast<cd>();
  Eigen::MatrixXcd h = sp.grid.anal(grid::pack(pc));
  std::vector<double> terms(2 * K + 1, 0.0);
  parallel::parallel_for(2 * K + 1, [&](int r) {
    Eigen::RowVectorXcd row = h.row(r);
    Eigen::Map<const Eigen::MatrixXcd> m(row.data(), D, D);
    if (m.cwiseAbs().maxCoeff() == 0) return;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    terms[r] = std::exp(2 * pi * rho * std::abs(r - K)) * svd.singularValues()(0);
  });
  return fourier::neumaier_sum(terms);
}

}  // namespace bsq::hyperbolic
