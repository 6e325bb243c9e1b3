#include "bsq/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bsq/error.hpp"

namespace bsq {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Constraint: return "constraint";
    case ErrorKind::DegenerateParameter: return "degenerate-parameter";
    case ErrorKind::Resonant: return "resonant";
    case ErrorKind::Solvability: return "solvability";
    case ErrorKind::Twist: return "twist";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::DegenerateEmbedding: return "degenerate-embedding";
    case ErrorKind::Direction: return "direction";
    case ErrorKind::NoDichotomy: return "no-dichotomy";
    case ErrorKind::PerturbationTooLarge: return "perturbation-too-large";
    case ErrorKind::TruncationResonance: return "truncation-resonance";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::ScheduleExhausted: return "schedule-exhausted";
    case ErrorKind::AlignmentFailure: return "alignment-failure";
    case ErrorKind::PrecheckFailed: return "precheck-failed";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

namespace fourier {

using std::numbers::pi;

const char* to_string(Parity p) {
  switch (p) {
    case Parity::EvenEven: return "even-even";
    case Parity::EvenOdd: return "even-odd";
    case Parity::OddEven: return "odd-even";
    case Parity::OddOdd: return "odd-odd";
    case Parity::None: return "none";
  }
  return "none";
}

bool theta_odd(Parity p) { return p == Parity::OddEven || p == Parity::OddOdd; }
bool x_odd(Parity p) { return p == Parity::EvenOdd || p == Parity::OddOdd; }
Parity make_parity(bool t, bool x) {
  if (t) return x ? Parity::OddOdd : Parity::OddEven;
  return x ? Parity::EvenOdd : Parity::EvenEven;
}

Parity parity_from_string(const std::string& s) {
  if (s == "even-even") return Parity::EvenEven;
  if (s == "even-odd") return Parity::EvenOdd;
  if (s == "odd-even") return Parity::OddEven;
  if (s == "odd-odd") return Parity::OddOdd;
  if (s == "none") return Parity::None;
  fail(ErrorKind::Structural, "unknown parity flag '" + s + "'");
}

TorusMap::TorusMap(int l, int d, int kt, int kx) : l_(l), d_(d), kt_(kt), kx_(kx) {
  if (l < 1 || l > 3) fail(ErrorKind::Structural, "angle dimension must be 1..3");
  if (d < 1 || kt < 0 || kx < 0) fail(ErrorKind::Structural, "invalid TorusMap radii");
  nk_ = 1;
  for (int i = 0; i < l; ++i) nk_ *= 2 * kt + 1;
  c_.assign(static_cast<size_t>(d) * nk_ * nj(), cplx(0.0));
  kabs_.resize(nk_);
  neg_.resize(nk_);
  for (int idx = 0; idx < nk_; ++idx) {
    auto k = kvec(idx);
    int s = 0;
    for (int v : k) s += std::abs(v);
    kabs_[idx] = s;
    for (int& v : k) v = -v;
    neg_[idx] = kindex(k);
  }
  zero_k_ = kindex(std::vector<int>(l, 0));
  parity_.assign(d, Parity::None);
}

bool TorusMap::in_range(const std::vector<int>& k, int j) const {
  if (static_cast<int>(k.size()) != l_ || std::abs(j) > kx_) return false;
  int s = 0;
  for (int v : k) s += std::abs(v);
  return s <= kt_;
}

int TorusMap::kindex(const std::vector<int>& k) const {
  int idx = 0;
  for (int i = 0; i < l_; ++i) idx = idx * (2 * kt_ + 1) + (k[i] + kt_);
  return idx;
}

std::vector<int> TorusMap::kvec(int kidx) const {
  std::vector<int> k(l_);
  for (int i = l_ - 1; i >= 0; --i) {
    k[i] = kidx % (2 * kt_ + 1) - kt_;
    kidx /= 2 * kt_ + 1;
  }
  return k;
}

cplx TorusMap::get(int comp, const std::vector<int>& k, int j) const {
  if (!in_range(k, j)) return 0.0;
  return at(comp, kindex(k), j);
}

void TorusMap::set(int comp, const std::vector<int>& k, int j, cplx v) {
  if (!in_range(k, j)) fail(ErrorKind::Structural, "multi-index outside truncation");
  at(comp, kindex(k), j) = v;
}

TorusMap TorusMap::component(int comp) const {
  TorusMap r(l_, 1, kt_, kx_);
  std::copy_n(c_.begin() + static_cast<size_t>(comp) * nk_ * nj(), static_cast<size_t>(nk_) * nj(), r.c_.begin());
  r.parity_[0] = parity_[comp];
  return r;
}

void TorusMap::set_component(int comp, const TorusMap& src) {
  TorusMap s = resize(src, kt_, kx_);
  std::copy_n(s.c_.begin(), static_cast<size_t>(nk_) * nj(), c_.begin() + static_cast<size_t>(comp) * nk_ * nj());
  parity_[comp] = src.parity()[0];
}

static void check_same(const TorusMap& a, const TorusMap& b) {
  if (a.l() != b.l() || a.d() != b.d() || a.kt() != b.kt() || a.kx() != b.kx())
    fail(ErrorKind::Structural, "TorusMap shapes differ");
}

TorusMap& TorusMap::operator+=(const TorusMap& o) {
  check_same(*this, o);
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  for (int c = 0; c < d_; ++c)
    if (parity_[c] != o.parity_[c]) parity_[c] = Parity::None;
  return *this;
}

TorusMap& TorusMap::operator-=(const TorusMap& o) {
  check_same(*this, o);
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  for (int c = 0; c < d_; ++c)
    if (parity_[c] != o.parity_[c]) parity_[c] = Parity::None;
  return *this;
}

TorusMap& TorusMap::operator*=(double s) {
  for (auto& v : c_) v *= s;
  return *this;
}

TorusMap& TorusMap::operator*=(cplx s) {
  for (auto& v : c_) v *= s;
  return *this;
}

double TorusMap::max_abs() const {
  double m = 0;
  for (auto& v : c_) m = std::max(m, std::abs(v));
  return m;
}

TorusMap operator+(TorusMap a, const TorusMap& b) { return a += b; }
TorusMap operator-(TorusMap a, const TorusMap& b) { return a -= b; }
TorusMap operator*(double s, TorusMap a) { return a *= s; }

TorusMap resize(const TorusMap& a, int kt, int kx, TruncationReport* tail) {
  TorusMap r(a.l(), a.d(), kt, kx);
  r.parity() = a.parity();
  double lost = 0;
  for (int c = 0; c < a.d(); ++c)
    for (int ki = 0; ki < a.nk(); ++ki) {
      if (a.kabs(ki) > a.kt()) continue;
      auto k = a.kvec(ki);
      for (int j = -a.kx(); j <= a.kx(); ++j) {
        cplx v = a.at(c, ki, j);
        if (v == cplx(0.0)) continue;
        if (r.in_range(k, j))
          r.at(c, r.kindex(k), j) = v;
        else
          lost += std::norm(v);
      }
    }
  if (tail) tail->tail_l2 = std::sqrt(lost);
  return r;
}

namespace {
struct Entry {
  int koff;  // sum k_i * stride_i
  int j;
  cplx v;
};

std::vector<Entry> nonzeros(const TorusMap& a, int comp, const std::vector<int>& stride) {
  std::vector<Entry> out;
  for (int ki = 0; ki < a.nk(); ++ki) {
    if (a.kabs(ki) > a.kt()) continue;
    auto k = a.kvec(ki);
    int off = 0;
    for (int i = 0; i < a.l(); ++i) off += k[i] * stride[i];
    for (int j = -a.kx(); j <= a.kx(); ++j) {
      cplx v = a.at(comp, ki, j);
      if (v != cplx(0.0)) out.push_back({off, j, v});
    }
  }
  return out;
}

Parity product_parity(Parity a, Parity b) {
  if (a == Parity::None || b == Parity::None) return Parity::None;
  return make_parity(theta_odd(a) != theta_odd(b), x_odd(a) != x_odd(b));
}
}  // namespace

TorusMap product(const TorusMap& a, const TorusMap& b) {
  if (a.l() != b.l()) fail(ErrorKind::Structural, "product: mismatched angle dimension");
  if (a.d() != b.d()) fail(ErrorKind::Structural, "product: mismatched component count");
  TorusMap r(a.l(), a.d(), a.kt() + b.kt(), a.kx() + b.kx());
  const int l = a.l();
  std::vector<int> stride(l);
  int s = 1;
  for (int i = l - 1; i >= 0; --i) {
    stride[i] = s;
    s *= 2 * r.kt() + 1;
  }
  int base = 0;
  for (int i = 0; i < l; ++i) base += r.kt() * stride[i];
  for (int c = 0; c < a.d(); ++c) {
    auto ea = nonzeros(a, c, stride);
    auto eb = nonzeros(b, c, stride);
    for (const auto& x : ea)
      for (const auto& y : eb) r.at(c, base + x.koff + y.koff, x.j + y.j) += x.v * y.v;
    r.parity()[c] = product_parity(a.parity()[c], b.parity()[c]);
  }
  return r;
}

TorusMap partial_x(const TorusMap& a, int order) {
  if (order < 0) fail(ErrorKind::Structural, "partial_x: negative order");
  TorusMap r = a;
  for (int c = 0; c < a.d(); ++c)
    for (int ki = 0; ki < a.nk(); ++ki)
      for (int j = -a.kx(); j <= a.kx(); ++j) r.at(c, ki, j) *= std::pow(cplx(0.0, 2 * pi * j), order);
  if (order % 2 == 1)
    for (auto& p : r.parity())
      if (p != Parity::None) p = make_parity(theta_odd(p), !x_odd(p));
  return r;
}

TorusMap omega_derivative(const TorusMap& a, const std::vector<double>& omega) {
  if (static_cast<int>(omega.size()) != a.l()) fail(ErrorKind::Structural, "omega has wrong length");
  TorusMap r = a;
  for (int ki = 0; ki < a.nk(); ++ki) {
    auto k = a.kvec(ki);
    double kw = 0;
    for (int i = 0; i < a.l(); ++i) kw += k[i] * omega[i];
    cplx f(0.0, 2 * pi * kw);
    for (int c = 0; c < a.d(); ++c)
      for (int j = -a.kx(); j <= a.kx(); ++j) r.at(c, ki, j) *= f;
  }
  for (auto& p : r.parity())
    if (p != Parity::None) p = make_parity(!theta_odd(p), x_odd(p));
  return r;
}

TorusMap partial_theta(const TorusMap& a, int dir) {
  std::vector<double> e(a.l(), 0.0);
  e.at(dir) = 1.0;
  return omega_derivative(a, e);
}

double neumaier_sum(const std::vector<double>& v) {
  double s = 0, c = 0;
  for (double x : v) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

double norm_rho_m(const TorusMap& a, int comp, double rho, int m) {
  std::vector<double> outer;
  std::vector<double> inner;
  for (int ki = 0; ki < a.nk(); ++ki) {
    if (a.kabs(ki) > a.kt()) continue;
    inner.clear();
    for (int j = -a.kx(); j <= a.kx(); ++j) {
      double aj = std::abs(j);
      double w = std::exp(4 * pi * rho * aj) * (std::pow(aj, 2 * m) + 1.0);
      inner.push_back(std::norm(a.at(comp, ki, j)) * w);
    }
    double s = neumaier_sum(inner);
    if (s > 0) outer.push_back(std::exp(2 * pi * rho * a.kabs(ki)) * std::sqrt(s));
  }
  return neumaier_sum(outer);
}

double norm_rho_m(const TorusMap& a, const NormParams& p, int comp) { return norm_rho_m(a, comp, p.rho, p.m); }

std::vector<double> sup_norm_strip(const TorusMap& a, double rho) {
  std::vector<double> out(a.d());
  for (int c = 0; c < a.d(); ++c) {
    std::vector<double> terms;
    for (int ki = 0; ki < a.nk(); ++ki)
      for (int j = -a.kx(); j <= a.kx(); ++j) {
        double v = std::abs(a.at(c, ki, j));
        if (v > 0) terms.push_back(v * std::exp(2 * pi * rho * (a.kabs(ki) + std::abs(j))));
      }
    out[c] = neumaier_sum(terms);
  }
  return out;
}

std::vector<cplx> average(const TorusMap& a) {
  std::vector<cplx> out(a.d());
  for (int c = 0; c < a.d(); ++c) out[c] = a.at(c, a.zero_k(), 0);
  return out;
}

TorusMap phase_shift(const TorusMap& a, const std::vector<double>& tau) {
  if (static_cast<int>(tau.size()) != a.l()) fail(ErrorKind::Structural, "phase shift has wrong length");
  TorusMap r = a;
  for (int ki = 0; ki < a.nk(); ++ki) {
    auto k = a.kvec(ki);
    double ph = 0;
    for (int i = 0; i < a.l(); ++i) ph += k[i] * tau[i];
    // reduce the phase mod 1 first so large k*tau keep full accuracy
    ph -= std::floor(ph);
    cplx f = std::polar(1.0, 2 * pi * ph);
    for (int c = 0; c < a.d(); ++c)
      for (int j = -a.kx(); j <= a.kx(); ++j) r.at(c, ki, j) *= f;
  }
  for (auto& p : r.parity()) p = Parity::None;
  return r;
}

double reality_defect(const TorusMap& a) {
  double m = 0;
  for (int c = 0; c < a.d(); ++c)
    for (int ki = 0; ki < a.nk(); ++ki)
      for (int j = -a.kx(); j <= a.kx(); ++j)
        m = std::max(m, std::abs(a.at(c, a.neg_k(ki), -j) - std::conj(a.at(c, ki, j))));
  return m;
}

void symmetrize_reality(TorusMap& a) {
  for (int c = 0; c < a.d(); ++c)
    for (int ki = 0; ki < a.nk(); ++ki)
      for (int j = -a.kx(); j <= a.kx(); ++j) {
        int nk = a.neg_k(ki);
        if (nk < ki || (nk == ki && -j < j)) continue;
        cplx v = 0.5 * (a.at(c, ki, j) + std::conj(a.at(c, nk, -j)));
        a.at(c, ki, j) = v;
        a.at(c, nk, -j) = std::conj(v);
      }
}

Parity detect_parity(const TorusMap& a, int comp, double tol) {
  // theta-even: c(-k, j) = c(k, j); x-even: c(k, -j) = c(k, j); odd with a minus sign
  double scale = std::max(a.max_abs(), 1e-300);
  bool te = true, to = true, xe = true, xo = true;
  for (int ki = 0; ki < a.nk(); ++ki)
    for (int j = -a.kx(); j <= a.kx(); ++j) {
      cplx v = a.at(comp, ki, j);
      cplx wt = a.at(comp, a.neg_k(ki), j), wx = a.at(comp, ki, -j);
      if (std::abs(v - wt) > tol * scale) te = false;
      if (std::abs(v + wt) > tol * scale) to = false;
      if (std::abs(v - wx) > tol * scale) xe = false;
      if (std::abs(v + wx) > tol * scale) xo = false;
    }
  if (!(te || to) || !(xe || xo)) return Parity::None;
  return make_parity(!te, !xe);
}

void refresh_parity(TorusMap& a, double tol) {
  for (int c = 0; c < a.d(); ++c) a.parity()[c] = detect_parity(a, c, tol);
}

cplx evaluate(const TorusMap& a, int comp, const std::vector<double>& theta, double x) {
  cplx s = 0;
  for (int ki = 0; ki < a.nk(); ++ki) {
    auto k = a.kvec(ki);
    double ph = 0;
    for (int i = 0; i < a.l(); ++i) ph += k[i] * theta[i];
    for (int j = -a.kx(); j <= a.kx(); ++j) {
      cplx v = a.at(comp, ki, j);
      if (v != cplx(0.0)) s += v * std::polar(1.0, 2 * pi * (ph + j * x));
    }
  }
  return s;
}

}  // namespace fourier
}  // namespace bsq
