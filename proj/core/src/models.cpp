#include "bsq/models.hpp"

#include <cmath>
#include <numbers>

#include "bsq/error.hpp"

namespace bsq::models {

using std::numbers::pi;
using fourier::Parity;
using cd = std::complex<double>;

const char* to_string(ModeClass c) {
  switch (c) {
    case ModeClass::Center: return "center";
    case ModeClass::Stable: return "stable";
    case ModeClass::Unstable: return "unstable";
  }
  return "center";
}

Model::Model(double mu, int m) : mu_(mu), m_(m) {
  if (!(mu > 0)) fail(ErrorKind::DegenerateParameter, "mu must be positive");
}

namespace {

void require_slice(const TorusMap& a) {
  if (a.l() != 1 || a.kt() != 0 || a.d() != 2) fail(ErrorKind::Structural, "expected a theta-independent 2-component slice");
}

// <f, g>_{L2} for real functions of x given by exponential coefficients
double l2(const TorusMap& a, int ca, const TorusMap& b, int cb, int kxmax) {
  double s = 0;
  for (int j = -kxmax; j <= kxmax; ++j) s += (a.get1(ca, 0, j) * std::conj(b.get1(cb, 0, j))).real();
  return s;
}

// d^{-p} on a slice component (zero mode mapped to zero)
TorusMap inv_dx(const TorusMap& a, int p) {
  TorusMap r = a;
  for (int c = 0; c < a.d(); ++c)
    for (int ki = 0; ki < a.nk(); ++ki)
      for (int j = -a.kx(); j <= a.kx(); ++j)
        r.at(c, ki, j) = j == 0 ? cd(0.0) : a.at(c, ki, j) / std::pow(cd(0.0, 2 * pi * j), p);
  return r;
}

class ScalarModel final : public Model {
 public:
  ScalarModel(double mu, int m) : Model(mu, m) {
    if (m < 3) fail(ErrorKind::Config, "scalar model needs Sobolev index m > 5/2");
  }
  ModelKind kind() const override { return ModelKind::Scalar; }
  std::string name() const override { return "boussinesq-scalar"; }

  Eigen::Matrix2cd linear_block(int j) const override {
    cd q(0.0, 2 * pi * j);
    Eigen::Matrix2cd a;
    a << 0.0, 1.0, q * q + mu_ * q * q * q * q, 0.0;
    return a;
  }
  Eigen::Matrix2d fiber_block(int j) const override {
    double q = 2 * pi * j;
    Eigen::Matrix2d a;
    a << 0.0, 1.0, -q * q + mu_ * q * q * q * q, 0.0;
    return a;
  }
  XBasis x_basis(int) const override { return XBasis::Cos; }
  Parity torus_parity(int comp) const override { return comp == 0 ? Parity::EvenEven : Parity::OddEven; }
  SpaceIndices spaces() const override { return {{m_, m_ - 2}, {m_ - 1, m_ - 3}}; }

  TorusMap nonlinearity(const TorusMap& z) const override {
    TorusMap u = z.component(0);
    TorusMap uu = fourier::partial_x(fourier::product(u, u), 2);
    TorusMap r(z.l(), 2, uu.kt(), uu.kx());
    r.set_component(1, uu);
    r.parity()[0] = Parity::EvenEven;
    return r;
  }
  TorusMap dnonlinearity(const TorusMap& z, const TorusMap& w) const override {
    TorusMap p = fourier::partial_x(fourier::product(z.component(0), w.component(0)), 2);
    p *= 2.0;
    TorusMap r(z.l(), 2, p.kt(), p.kx());
    r.set_component(1, p);
    return r;
  }
  double symplectic_form(const TorusMap& a, const TorusMap& b) const override {
    require_slice(a);
    require_slice(b);
    int kx = std::max(a.kx(), b.kx());
    TorusMap b2 = inv_dx(b, 2);
    return -l2(a, 0, b2, 1, kx) + l2(a, 1, b2, 0, kx);
  }
  double hamiltonian(const TorusMap& z) const override {
    require_slice(z);
    int kx = z.kx();
    TorusMap ux = fourier::partial_x(z, 1);
    TorusMap iv = inv_dx(z, 1);
    double quad = 0.5 * (l2(z, 0, z, 0, kx) - mu_ * l2(ux, 0, ux, 0, kx) + l2(iv, 1, iv, 1, kx));
    TorusMap u = z.component(0);
    TorusMap u3 = fourier::product(fourier::product(u, u), u);
    return quad + u3.get1(0, 0, 0).real() / 3.0;
  }
  Eigen::MatrixXd fiber_symplectic(int kx) const override {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * kx, 2 * kx);
    for (int j = 1; j <= kx; ++j) {
      double q = 2 * pi * j;
      J(j - 1, kx + j - 1) = 0.5 / (q * q);
      J(kx + j - 1, j - 1) = -0.5 / (q * q);
    }
    return J;
  }
};

class SystemModel final : public Model {
 public:
  SystemModel(double mu, int m) : Model(mu, m) {
    if (m < 1) fail(ErrorKind::Config, "system model needs Sobolev index m >= 1");
  }
  ModelKind kind() const override { return ModelKind::System; }
  std::string name() const override { return "boussinesq-system"; }

  Eigen::Matrix2cd linear_block(int j) const override {
    cd q(0.0, 2 * pi * j);
    Eigen::Matrix2cd a;
    a << 0.0, -q - mu_ * q * q * q, -q, 0.0;
    return a;
  }
  Eigen::Matrix2d fiber_block(int j) const override {
    double q = 2 * pi * j;
    Eigen::Matrix2d a;
    a << 0.0, -q * (1 - mu_ * q * q), q, 0.0;
    return a;
  }
  XBasis x_basis(int comp) const override { return comp == 0 ? XBasis::Cos : XBasis::Sin; }
  Parity torus_parity(int comp) const override { return comp == 0 ? Parity::EvenEven : Parity::OddOdd; }
  SpaceIndices spaces() const override { return {{m_, m_ + 1}, {m_ - 1, m_}}; }

  TorusMap nonlinearity(const TorusMap& z) const override {
    TorusMap uv = fourier::partial_x(fourier::product(z.component(0), z.component(1)), 1);
    TorusMap r(z.l(), 2, uv.kt(), uv.kx());
    r.set_component(0, uv);
    r.parity()[1] = Parity::EvenEven;
    return r;
  }
  TorusMap dnonlinearity(const TorusMap& z, const TorusMap& w) const override {
    TorusMap s = fourier::product(z.component(0), w.component(1)) + fourier::product(z.component(1), w.component(0));
    TorusMap p = fourier::partial_x(s, 1);
    TorusMap r(z.l(), 2, p.kt(), p.kx());
    r.set_component(0, p);
    return r;
  }
  double symplectic_form(const TorusMap& a, const TorusMap& b) const override {
    require_slice(a);
    require_slice(b);
    int kx = std::max(a.kx(), b.kx());
    TorusMap b1 = inv_dx(b, 1);
    return l2(a, 0, b1, 1, kx) + l2(a, 1, b1, 0, kx);
  }
  double hamiltonian(const TorusMap& z) const override {
    require_slice(z);
    int kx = z.kx();
    TorusMap zx = fourier::partial_x(z, 1);
    double quad = 0.5 * (l2(z, 0, z, 0, kx) + l2(z, 1, z, 1, kx) - mu_ * l2(zx, 1, zx, 1, kx));
    TorusMap u = z.component(0), v = z.component(1);
    TorusMap uvv = fourier::product(fourier::product(u, v), v);
    return quad + uvv.get1(0, 0, 0).real();
  }
  Eigen::MatrixXd fiber_symplectic(int kx) const override {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * kx, 2 * kx);
    for (int j = 1; j <= kx; ++j) {
      double q = 2 * pi * j;
      J(j - 1, kx + j - 1) = -0.5 / q;
      J(kx + j - 1, j - 1) = 0.5 / q;
    }
    return J;
  }
};

}  // namespace

std::unique_ptr<Model> make_model(ModelKind kind, double mu, int m) {
  if (kind == ModelKind::Scalar) return std::make_unique<ScalarModel>(mu, m);
  return std::make_unique<SystemModel>(mu, m);
}

std::unique_ptr<Model> make_model(const std::string& name, double mu, int m) {
  if (name == "boussinesq-scalar" || name == "scalar") return make_model(ModelKind::Scalar, mu, m);
  if (name == "boussinesq-system" || name == "system") return make_model(ModelKind::System, mu, m);
  fail(ErrorKind::Config, "unknown model '" + name + "'");
}

Eigen::Matrix2cd linear_block(const Model& model, int j) { return model.linear_block(j); }

std::pair<cplx, cplx> dispersion(const Model& model, int j) {
  Eigen::Matrix2cd a = model.linear_block(j);
  cd s2 = a(0, 1) * a(1, 0);  // both blocks are off-diagonal
  cd s = std::sqrt(s2);
  if (s.real() < 0 || (s.real() == 0 && s.imag() < 0)) s = -s;
  return {s, -s};
}

SpectrumReport center_analysis(const Model& model, int jmax) {
  SpectrumReport rep;
  rep.mu = model.mu();
  for (int j = 1; j <= jmax; ++j) {
    double g = 1 - 4 * pi * pi * model.mu() * j * j;
    if (std::abs(g) < 1e-12)
      fail(ErrorKind::DegenerateParameter,
           "mu is resonant: 4 pi^2 mu j^2 = 1 at j = " + std::to_string(j) + " (sigma = 0)");
    auto [sp, sm] = dispersion(model, j);
    ModeInfo mi{j, sp, sm, g > 0 ? ModeClass::Center : ModeClass::Unstable};
    rep.modes.push_back(mi);
    if (g > 0) {
      rep.ell++;
      rep.center_j.push_back(j);
      rep.sigma_im.push_back(sp.imag());
      rep.omega0.push_back(sp.imag() / (2 * pi));
      Eigen::Matrix2d b = model.fiber_block(j);
      Eigen::Vector2cd v(b(0, 1), sp);
      rep.center_vectors.push_back(v / v.norm());
    }
  }
  return rep;
}

TorusMap apply_vectorfield(const Model& model, const TorusMap& z, fourier::TruncationReport* tail) {
  if (z.d() != 2) fail(ErrorKind::Structural, "vector field expects two components");
  double scale = std::max(z.max_abs(), 1e-300);
  for (int c = 0; c < 2; ++c)
    for (int ki = 0; ki < z.nk(); ++ki)
      if (std::abs(z.at(c, ki, 0)) > 1e-13 * scale) fail(ErrorKind::Constraint, "zero-mean constraint violated");
  TorusMap r = z;
  for (int j = -z.kx(); j <= z.kx(); ++j) {
    Eigen::Matrix2cd a = model.linear_block(j);
    for (int ki = 0; ki < z.nk(); ++ki) {
      cd u = z.at(0, ki, j), v = z.at(1, ki, j);
      r.at(0, ki, j) = a(0, 0) * u + a(0, 1) * v;
      r.at(1, ki, j) = a(1, 0) * u + a(1, 1) * v;
    }
  }
  TorusMap n = fourier::resize(model.nonlinearity(z), z.kt(), z.kx(), tail);
  r += n;
  for (auto& p : r.parity()) p = Parity::None;
  return r;
}

TorusMap residual(const Model& model, const TorusMap& K, const std::vector<double>& omega,
                  fourier::TruncationReport* tail) {
  TorusMap e = fourier::omega_derivative(K, omega);
  e -= apply_vectorfield(model, K, tail);
  return e;
}

double symplectic_form(const Model& model, const TorusMap& u, const TorusMap& v) { return model.symplectic_form(u, v); }
double hamiltonian(const Model& model, const TorusMap& z) { return model.hamiltonian(z); }

TorusMap enforce_constraints(const Model& model, const TorusMap& z, ConstraintOptions opt) {
  TorusMap r = z;
  for (int c = 0; c < r.d(); ++c) {
    double sx = (c < 2 && model.x_basis(c) == XBasis::Sin) ? -1.0 : 1.0;
    for (int ki = 0; ki < r.nk(); ++ki) {
      r.at(c, ki, 0) = 0.0;
      for (int j = 1; j <= r.kx(); ++j) {
        cd a = 0.5 * (r.at(c, ki, j) + sx * r.at(c, ki, -j));
        r.at(c, ki, j) = a;
        r.at(c, ki, -j) = sx * a;
      }
    }
    if (opt.theta_parity) {
      double st = fourier::theta_odd(model.torus_parity(c)) ? -1.0 : 1.0;
      for (int ki = 0; ki < r.nk(); ++ki) {
        int nk = r.neg_k(ki);
        if (nk < ki) continue;
        for (int j = -r.kx(); j <= r.kx(); ++j) {
          if (nk == ki) {
            if (st < 0) r.at(c, ki, j) = 0.0;
            continue;
          }
          cd a = 0.5 * (r.at(c, ki, j) + st * r.at(c, nk, j));
          r.at(c, ki, j) = a;
          r.at(c, nk, j) = st * a;
        }
      }
    }
  }
  fourier::symmetrize_reality(r);
  fourier::refresh_parity(r);
  return r;
}

double norm_indices(const TorusMap& z, double rho, const int m[2]) {
  std::vector<double> outer, inner;
  for (int ki = 0; ki < z.nk(); ++ki) {
    if (z.kabs(ki) > z.kt()) continue;
    inner.clear();
    for (int c = 0; c < std::min(z.d(), 2); ++c)
      for (int j = -z.kx(); j <= z.kx(); ++j) {
        double aj = std::abs(j);
        inner.push_back(std::norm(z.at(c, ki, j)) * std::exp(4 * pi * rho * aj) * (std::pow(aj, 2 * m[c]) + 1.0));
      }
    double s = fourier::neumaier_sum(inner);
    if (s > 0) outer.push_back(std::exp(2 * pi * rho * z.kabs(ki)) * std::sqrt(s));
  }
  return fourier::neumaier_sum(outer);
}

double norm_X(const Model& model, const TorusMap& z, double rho) { return norm_indices(z, rho, model.spaces().mX); }
double norm_Y(const Model& model, const TorusMap& z, double rho) { return norm_indices(z, rho, model.spaces().mY); }

// --- Fiber -------------------------------------------------------------

Fiber::Fiber(const Model& model, int kx) : model_(&model), kx_(kx) {
  if (kx < 1) fail(ErrorKind::Structural, "fiber needs kx >= 1");
  int D = 2 * kx;
  a0_ = Eigen::MatrixXd::Zero(D, D);
  for (int j = 1; j <= kx; ++j) {
    Eigen::Matrix2d b = model.fiber_block(j);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) a0_(slot(r, j), slot(c, j)) = b(r, c);
  }
  j_ = model.fiber_symplectic(kx);
}

Eigen::MatrixXcd Fiber::to_fiber(const TorusMap& z) const {
  if (z.l() != 1 || z.d() != 2) fail(ErrorKind::Structural, "fiber conversion needs l = 1, d = 2");
  int kt = z.kt();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * kt + 1, dim());
  for (int k = -kt; k <= kt; ++k)
    for (int c = 0; c < 2; ++c) {
      bool sin = model_->x_basis(c) == XBasis::Sin;
      for (int j = 1; j <= std::min(kx_, z.kx()); ++j) {
        cd p = z.get1(c, k, j), m = z.get1(c, k, -j);
        out(k + kt, slot(c, j)) = sin ? cd(0.0, 1.0) * (p - m) : p + m;
      }
    }
  return out;
}

TorusMap Fiber::from_fiber(const Eigen::MatrixXcd& rows, int kt) const {
  int K = (static_cast<int>(rows.rows()) - 1) / 2;
  TorusMap z(1, 2, kt, kx_);
  for (int k = -std::min(K, kt); k <= std::min(K, kt); ++k)
    for (int c = 0; c < 2; ++c) {
      bool sin = model_->x_basis(c) == XBasis::Sin;
      for (int j = 1; j <= kx_; ++j) {
        cd a = rows(k + K, slot(c, j));
        if (sin) {
          z.set1(c, k, j, cd(0.0, -0.5) * a);
          z.set1(c, k, -j, cd(0.0, 0.5) * a);
        } else {
          z.set1(c, k, j, 0.5 * a);
          z.set1(c, k, -j, 0.5 * a);
        }
      }
    }
  return z;
}

TorusMap Fiber::slice(const Eigen::VectorXd& v) const {
  Eigen::MatrixXcd row = v.transpose().cast<cd>();
  return from_fiber(row, 0);
}

Eigen::VectorXd Fiber::slice_to_fiber(const TorusMap& s) const { return to_fiber(s).row(0).real().transpose(); }

Eigen::VectorXd Fiber::weights(double rho, const int m[2]) const {
  Eigen::VectorXd w(dim());
  for (int c = 0; c < 2; ++c)
    for (int j = 1; j <= kx_; ++j)
      w(slot(c, j)) = std::sqrt(0.5 * std::exp(4 * pi * rho * j) * (std::pow(double(j), 2 * m[c]) + 1.0));
  return w;
}

Eigen::VectorXd Fiber::weights_X(double rho) const { return weights(rho, model_->spaces().mX); }
Eigen::VectorXd Fiber::weights_Y(double rho) const { return weights(rho, model_->spaces().mY); }

}  // namespace bsq::models
