#include "bsq/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "bsq/error.hpp"
#include "bsq/parallel.hpp"

namespace bsq::hyperbolic {

namespace {

constexpr double kC1 = 0.5 - 0.28867513459481288225;
constexpr double kC2 = 0.5 + 0.28867513459481288225;
constexpr double kM4 = 0.14433756729740644113;

void check_direction(BundleKind b, double sign) {
  if (b == BundleKind::Stable && sign < 0)
    fail(ErrorKind::Direction, "the stable cocycle is only defined forward in time");
  if (b == BundleKind::Unstable && sign > 0)
    fail(ErrorKind::Direction, "the unstable cocycle is only defined backward in time");
}

std::vector<double> geomspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a * std::pow(b / a, n > 1 ? double(i) / (n - 1) : 0.0);
  return out;
}

// least squares y ~ X c; returns c and the residual rms
Eigen::VectorXd lsq(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double* rms) {
  Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
  if (rms) *rms = std::sqrt((X * c - y).squaredNorm() / std::max<Eigen::Index>(1, y.size()));
  return c;
}

}  // namespace

std::vector<Eigen::MatrixXcd> cocycle_track(const SplittingData& sp, BundleKind b, double theta,
                                            const std::vector<double>& times, double h) {
  const Bundle& bd = sp.bundle(b);
  std::vector<Eigen::MatrixXcd> out;
  if (times.empty()) return out;
  double sign = 0;
  for (double t : times)
    if (t != 0) sign = t > 0 ? 1 : -1;
  if (sign == 0) sign = 1;
  check_direction(b, sign);
  const double om = sp.omega;
  Eigen::MatrixXcd Phi = Eigen::MatrixXcd::Identity(bd.rank(), bd.rank());
  double s = 0;
  for (double t : times) {
    if (t * sign < 0) fail(ErrorKind::Direction, "cocycle_track times must share one sign");
    double target = std::abs(t);
    if (target < s) fail(ErrorKind::Structural, "cocycle_track times must be sorted by |t|");
    double span = target - s;
    int ns = span > 0 ? std::max(1, static_cast<int>(std::ceil(span / h))) : 0;
    double dh = ns ? span / ns : 0;
    for (int i = 0; i < ns; ++i) {
      double s0 = s + i * dh;
      Eigen::MatrixXcd A1 = sign * bd.generator(theta + sign * om * (s0 + kC1 * dh));
      Eigen::MatrixXcd A2 = sign * bd.generator(theta + sign * om * (s0 + kC2 * dh));
      Eigen::MatrixXcd Om = 0.5 * dh * (A1 + A2) + kM4 * dh * dh * (A2 * A1 - A1 * A2);
      Phi = Om.exp() * Phi;
    }
    s = target;
    out.push_back(Phi);
  }
  return out;
}

Eigen::MatrixXcd cocycle_evolve(const SplittingData& sp, BundleKind b, double theta, double t, double h) {
  return cocycle_track(sp, b, theta, {t}, h)[0];
}

Eigen::MatrixXd cocycle_physical(const SplittingData& sp, BundleKind b, double theta, double t, double h) {
  Eigen::MatrixXcd Phi = cocycle_evolve(sp, b, theta, t, h);
  return (embedding_at(sp, b, theta + sp.omega * t) * Phi * reduction_at(sp, b, theta)).real();
}

std::vector<double> cocycle_norms(const SplittingData& sp, BundleKind b, const std::vector<double>& times,
                                  const RateOptions& opt) {
  models::Fiber fib(*sp.model, sp.kx);
  Eigen::VectorXd wx = fib.weights_X(opt.rho), wyi = fib.weights_Y(opt.rho).cwiseInverse();
  const double h = b == BundleKind::Center ? opt.h_center : opt.h;
  std::vector<std::vector<double>> per(opt.n_theta);
  parallel::parallel_for(opt.n_theta, [&](int i) {
    double th = double(i) / opt.n_theta;
    auto Phis = cocycle_track(sp, b, th, times, h);
    Eigen::MatrixXcd Ein = reduction_at(sp, b, th) * wyi.asDiagonal();
    per[i].resize(times.size());
    for (size_t n = 0; n < times.size(); ++n) {
      Eigen::MatrixXcd Eout = wx.asDiagonal() * embedding_at(sp, b, th + sp.omega * times[n]);
      // sigma_max(Eout Phi Ein) through the triangular factors of the two thin frames
      Eigen::HouseholderQR<Eigen::MatrixXcd> qo(Eout), qi(Ein.adjoint());
      const int r = static_cast<int>(Phis[n].rows());
      Eigen::MatrixXcd Ro = qo.matrixQR().topRows(r).triangularView<Eigen::Upper>();
      Eigen::MatrixXcd Ri = qi.matrixQR().topRows(r).triangularView<Eigen::Upper>();
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Ro * Phis[n] * Ri.adjoint());
      per[i][n] = svd.singularValues()(0);
    }
  });
  std::vector<double> g(times.size(), 0.0);
  for (int i = 0; i < opt.n_theta; ++i)
    for (size_t n = 0; n < times.size(); ++n) g[n] = std::max(g[n], per[i][n]);
  return g;
}

DecayFit fit_decay(const std::vector<double>& t_short, const std::vector<double>& g_short,
                   const std::vector<double>& t_tail, const std::vector<double>& g_tail) {
  DecayFit f;
  const int nt = static_cast<int>(t_tail.size()), ns = static_cast<int>(t_short.size());
  Eigen::MatrixXd X(nt, 2);
  Eigen::VectorXd y(nt);
  for (int i = 0; i < nt; ++i) {
    X(i, 0) = 1;
    X(i, 1) = -t_tail[i];
    y(i) = std::log(g_tail[i]);
  }
  double r1 = 0, r2 = 0;
  Eigen::VectorXd c = lsq(X, y, &r1);
  f.beta = c(1);
  // short window: free three-parameter fit, its exponential rate is a nuisance parameter
  Eigen::MatrixXd Xs(ns, 3);
  Eigen::VectorXd ys(ns);
  for (int i = 0; i < ns; ++i) {
    Xs(i, 0) = 1;
    Xs(i, 1) = -t_short[i];
    Xs(i, 2) = -std::log(t_short[i]);
    ys(i) = std::log(g_short[i]);
  }
  Eigen::VectorXd cs = lsq(Xs, ys, &r2);
  f.logC = cs(0);
  f.alpha = cs(2);
  double s2 = ns > 3 ? (Xs * cs - ys).squaredNorm() / (ns - 3) : 0.0;
  Eigen::MatrixXd cov = (Xs.transpose() * Xs).inverse() * s2;
  f.alpha_stderr = std::sqrt(std::max(0.0, cov(2, 2)));
  f.residual = std::max(r1, r2);
  return f;
}

double fit_growth(const std::vector<double>& t, const std::vector<double>& g) {
  const int n = static_cast<int>(t.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1;
    X(i, 1) = t[i];
    X(i, 2) = std::log1p(t[i]);
    y(i) = std::log(g[i]);
  }
  return lsq(X, y, nullptr)(1);
}

Rates rate_estimate(const SplittingData& sp, const RateOptions& opt) {
  Rates r;
  auto ts = geomspace(opt.short_lo, opt.short_hi, opt.n_short);
  auto tt = geomspace(opt.tail_lo, opt.tail_hi, opt.n_tail);
  std::vector<double> all = ts;
  all.insert(all.end(), tt.begin(), tt.end());
  double ch = 0, res = 0;
  for (BundleKind b : {BundleKind::Stable, BundleKind::Unstable}) {
    if (sp.bundle(b).rank() == 0) continue;
    double sg = b == BundleKind::Stable ? 1.0 : -1.0;
    std::vector<double> times(all.size());
    for (size_t i = 0; i < all.size(); ++i) times[i] = sg * all[i];
    auto g = cocycle_norms(sp, b, times, opt);
    std::vector<double> gs(g.begin(), g.begin() + ts.size()), gt(g.begin() + ts.size(), g.end());
    DecayFit f = fit_decay(ts, gs, tt, gt);
    for (size_t i = 0; i < all.size(); ++i)
      ch = std::max(ch, g[i] * std::pow(std::min(all[i], 1.0), f.alpha) * std::exp(f.beta * all[i]));
    res = std::max(res, f.residual);
    if (b == BundleKind::Stable) {
      r.b1 = f.beta;
      r.a1 = f.alpha;
      r.a1_stderr = f.alpha_stderr;
    } else {
      r.b2 = f.beta;
      r.a2 = f.alpha;
      r.a2_stderr = f.alpha_stderr;
    }
  }
  r.Ch = ch;
  r.fit_residual = res;
  if (opt.center && sp.c.rank() > 0) {
    std::vector<double> tc(opt.n_center);
    for (int i = 0; i < opt.n_center; ++i) tc[i] = opt.center_T * i / std::max(1, opt.n_center - 1);
    r.b3p = fit_growth(tc, cocycle_norms(sp, BundleKind::Center, tc, opt));
    std::vector<double> tm(tc.size());
    for (size_t i = 0; i < tc.size(); ++i) tm[i] = -tc[i];
    r.b3m = fit_growth(tc, cocycle_norms(sp, BundleKind::Center, tm, opt));
  }
  return r;
}

}  // namespace bsq::hyperbolic
