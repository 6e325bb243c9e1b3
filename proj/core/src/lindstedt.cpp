#include "bsq/lindstedt.hpp"

#include <cmath>
#include <numbers>

#include "bsq/error.hpp"

namespace bsq::lindstedt {

using std::numbers::pi;
using cd = std::complex<double>;
using models::ModelKind;

namespace {

double dot(const std::vector<int>& k, const std::vector<double>& w) {
  double s = 0;
  for (size_t i = 0; i < k.size(); ++i) s += k[i] * w[i];
  return s;
}

// kernel set: (+-e_i, +-j_i) with j_i = i + 1
bool is_kernel(const std::vector<int>& k, int j, int ell) {
  int nz = 0, at = -1;
  for (int i = 0; i < static_cast<int>(k.size()); ++i)
    if (k[i] != 0) {
      ++nz;
      at = i;
    }
  if (nz != 1 || std::abs(k[at]) != 1) return false;
  return at < ell && std::abs(j) == at + 1;
}

// (omega^a . d)(omega^b . d) at mode k
double second_symbol(const std::vector<int>& k, const std::vector<double>& wa, const std::vector<double>& wb) {
  return -4 * pi * pi * dot(k, wa) * dot(k, wb);
}

}  // namespace

double multiplier(const models::Model& model, const std::vector<double>& omega0, const std::vector<int>& k, int j) {
  double kw = 2 * pi * dot(k, omega0);
  double q = 2 * pi * j;
  return -kw * kw + q * q - model.mu() * q * q * q * q;
}

Eigen::Matrix2d multiplier_block(const models::Model& model, const std::vector<double>& omega0,
                                 const std::vector<int>& k, int j) {
  Eigen::Matrix2d b;
  if (model.kind() == ModelKind::Scalar) {
    double F = multiplier(model, omega0, k, j);
    b << F, 0, 0, F;
    return b;
  }
  double kw = 2 * pi * dot(k, omega0);
  double q = 2 * pi * j;
  b << -kw, q * (1 - model.mu() * q * q), -q, kw;
  return b;
}

NonresonanceReport nonresonance_check(const models::Model& model, const std::vector<double>& omega0, int N,
                                      double rel_tol) {
  NonresonanceReport rep;
  rep.order = N;
  rep.min_abs_F = std::numeric_limits<double>::infinity();
  if (N < 2) return rep;
  int ell = static_cast<int>(omega0.size());
  TorusMap box(ell, 1, N, 0);
  double scale = std::pow(2 * pi * N, 4) * model.mu() + std::pow(2 * pi * N, 2);
  for (int ki = 0; ki < box.nk(); ++ki) {
    if (box.kabs(ki) > N) continue;
    auto k = box.kvec(ki);
    for (int j = 1; j <= N; ++j) {
      if (is_kernel(k, j, ell)) continue;
      double F = multiplier(model, omega0, k, j);
      if (std::abs(F) < rep.min_abs_F) {
        rep.min_abs_F = std::abs(F);
        rep.argmin_k = k;
        rep.argmin_j = j;
      }
      if (std::abs(F) <= rel_tol * scale) {
        rep.pass = false;
        rep.resonant.push_back({k, j, F});
      }
    }
  }
  return rep;
}

LindstedtSeries initial_series(const models::Model& model, const std::vector<double>& amplitudes, int max_order) {
  auto spec = models::center_analysis(model);
  if (spec.ell == 0) fail(ErrorKind::DegenerateParameter, "no center modes: there are no torus dimensions");
  if (static_cast<int>(amplitudes.size()) != spec.ell)
    fail(ErrorKind::Config, "expected " + std::to_string(spec.ell) + " amplitudes");
  if (spec.ell > 3) fail(ErrorKind::Structural, "lindstedt supports ell <= 3");
  for (double a : amplitudes)
    if (a == 0) fail(ErrorKind::Config, "amplitudes must be nonzero");
  LindstedtSeries s;
  s.kind = model.kind();
  s.mu = model.mu();
  s.ell = spec.ell;
  s.omega0 = spec.omega0;
  s.amplitudes = amplitudes;
  const int R = std::max(max_order, 1);
  TorusMap z1(s.ell, 2, R, R);
  for (int i = 0; i < s.ell; ++i) {
    int ji = i + 1;
    for (int sk : {-1, 1})
      for (int sj : {-1, 1}) {
        std::vector<int> k(s.ell, 0);
        k[i] = sk;
        cd u = amplitudes[i] / 4.0;
        z1.set(0, k, sj * ji, u);
        if (model.kind() == ModelKind::System) {
          Eigen::Matrix2cd a = model.linear_block(sj * ji);
          z1.set(1, k, sj * ji, a(1, 0) * u / cd(0.0, 2 * pi * sk * s.omega0[i]));
        }
      }
  }
  fourier::refresh_parity(z1);
  s.Z.push_back(z1);
  s.kernel_component.push_back(0.0);
  s.kernel_leftover.push_back(0.0);
  return s;
}

void lindstedt_step(const models::Model& model, LindstedtSeries& s) {
  const int m = s.order() + 1;
  const int R = s.Z[0].kt();
  if (m > R) fail(ErrorKind::Structural, "series storage radius exceeded");
  auto nr = nonresonance_check(model, s.omega0, m);
  if (!nr.pass) fail(ErrorKind::Resonant, "nonresonance check failed at order " + std::to_string(m));
  const int ell = s.ell;
  auto wof = [&](int a) -> std::vector<double> { return a == 0 ? s.omega0 : s.omega[a - 1]; };

  // known right-hand side
  TorusMap rhs(ell, 2, R, R);
  for (int p = 1; p < m; ++p) {
    int q = m - p;
    if (s.kind == ModelKind::Scalar) {
      TorusMap pr = fourier::product(s.Z[p - 1].component(0), s.Z[q - 1].component(0));
      TorusMap t(ell, 2, pr.kt(), pr.kx());
      t.set_component(0, fourier::partial_x(pr, 2));
      rhs += fourier::resize(t, R, R);
    } else {
      TorusMap pr = fourier::product(s.Z[p - 1].component(0), s.Z[q - 1].component(1));
      TorusMap t(ell, 2, pr.kt(), pr.kx());
      t.set_component(0, fourier::partial_x(pr, 1));
      rhs += fourier::resize(t, R, R);
    }
  }
  for (int ki = 0; ki < rhs.nk(); ++ki) {
    auto k = rhs.kvec(ki);
    for (int j = -R; j <= R; ++j) {
      cd acc[2] = {0.0, 0.0};
      if (s.kind == ModelKind::Scalar) {
        for (int c = 1; c < m; ++c)
          for (int a = 0; a <= m - c; ++a) {
            int b = m - c - a;
            if (c == 1 && (a == m - 1 || b == m - 1)) continue;
            acc[0] += second_symbol(k, wof(a), wof(b)) * s.Z[c - 1].at(0, ki, j);
          }
      } else {
        for (int a = 1; a <= m - 2; ++a) {
          cd f(0.0, 2 * pi * dot(k, wof(a)));
          acc[0] += f * s.Z[m - a - 1].at(0, ki, j);
          acc[1] += f * s.Z[m - a - 1].at(1, ki, j);
        }
      }
      rhs.at(0, ki, j) -= acc[0];
      rhs.at(1, ki, j) -= acc[1];
    }
  }

  // frequency matching on the kernel modes (e_i, j_i)
  std::vector<double> wm1(ell, 0.0);
  double kc = 0;
  for (int i = 0; i < ell; ++i) {
    std::vector<int> k(ell, 0);
    k[i] = 1;
    int ji = i + 1;
    cd u1 = s.Z[0].get(0, k, ji);
    if (s.kind == ModelKind::Scalar) {
      cd r = rhs.get(0, k, ji);
      kc = std::max(kc, std::abs(r));
      wm1[i] = -r.real() / (2 * pi * pi * s.omega0[i] * s.amplitudes[i]);
    } else {
      Eigen::Matrix2cd L = cd(0.0, 2 * pi * s.omega0[i]) * Eigen::Matrix2cd::Identity() - model.linear_block(ji);
      // left null vector of L
      Eigen::RowVector2cd y(-L(1, 0), L(0, 0));
      if (std::abs(L(0, 0)) + std::abs(L(1, 0)) < 1e-300) y << L(1, 1), -L(0, 1);
      Eigen::Vector2cd r(rhs.get(0, k, ji), rhs.get(1, k, ji));
      Eigen::Vector2cd z1(u1, s.Z[0].get(1, k, ji));
      cd num = y * r;
      cd den = cd(0.0, 2 * pi) * (y * z1)(0);
      kc = std::max(kc, std::abs(num) / std::max(y.norm(), 1e-300));
      wm1[i] = (num / den).real();
    }
  }
  s.kernel_component.push_back(kc);
  if (m >= 2) s.omega.push_back(wm1);
  // subtract the matched kernel term
  for (int ki = 0; ki < rhs.nk(); ++ki) {
    auto k = rhs.kvec(ki);
    for (int j = -R; j <= R; ++j) {
      if (s.kind == ModelKind::Scalar) {
        rhs.at(0, ki, j) -= 2.0 * second_symbol(k, wm1, s.omega0) * s.Z[0].at(0, ki, j);
      } else {
        cd f(0.0, 2 * pi * dot(k, wm1));
        rhs.at(0, ki, j) -= f * s.Z[0].at(0, ki, j);
        rhs.at(1, ki, j) -= f * s.Z[0].at(1, ki, j);
      }
    }
  }

  TorusMap zm(ell, 2, R, R);
  double left = 0;
  for (int ki = 0; ki < rhs.nk(); ++ki) {
    if (rhs.kabs(ki) > R) continue;
    auto k = rhs.kvec(ki);
    for (int j = -R; j <= R; ++j) {
      if (j == 0) continue;
      bool ker = is_kernel(k, j, ell);
      if (s.kind == ModelKind::Scalar) {
        cd r = rhs.at(0, ki, j);
        if (ker) {
          left = std::max(left, std::abs(r));
          continue;
        }
        zm.at(0, ki, j) = r / multiplier(model, s.omega0, k, j);
      } else {
        Eigen::Matrix2cd L =
            cd(0.0, 2 * pi * dot(k, s.omega0)) * Eigen::Matrix2cd::Identity() - model.linear_block(j);
        Eigen::Vector2cd r(rhs.at(0, ki, j), rhs.at(1, ki, j));
        if (r.squaredNorm() == 0) continue;
        if (ker) {
          cd v = r(0) / L(0, 1);
          left = std::max(left, std::abs(r(1) - L(1, 1) * v));
          zm.at(1, ki, j) = v;
          continue;
        }
        Eigen::Vector2cd x = L.partialPivLu().solve(r);
        zm.at(0, ki, j) = x(0);
        zm.at(1, ki, j) = x(1);
      }
    }
  }
  s.kernel_leftover.push_back(left);
  fourier::symmetrize_reality(zm);
  fourier::refresh_parity(zm);
  s.Z.push_back(zm);
}

LindstedtSeries build_series(const models::Model& model, int N, const std::vector<double>& amplitudes) {
  if (N < 1) fail(ErrorKind::Config, "Lindstedt order must be >= 1");
  auto s = initial_series(model, amplitudes, N);
  for (int m = 2; m <= N; ++m) lindstedt_step(model, s);
  return s;
}

Seed assemble_seed(const models::Model& model, const LindstedtSeries& s, double eps, int kt, int kx) {
  Seed out;
  out.omega = s.omega0;
  for (size_t a = 0; a < s.omega.size(); ++a)
    for (int i = 0; i < s.ell; ++i) out.omega[i] += std::pow(eps, a + 1) * s.omega[a][i];
  TorusMap K(s.ell, 2, s.Z[0].kt(), s.Z[0].kx());
  for (int m = 1; m <= s.order(); ++m) {
    TorusMap t = s.Z[m - 1];
    t *= std::pow(eps, m);
    K += t;
  }
  if (s.kind == ModelKind::Scalar) {
    TorusMap u = K.component(0);
    K.set_component(1, fourier::omega_derivative(u, out.omega));
  }
  K = fourier::resize(K, kt, kx);
  out.K = models::enforce_constraints(model, K);
  return out;
}

}  // namespace bsq::lindstedt
