#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace bsq {

using cplx = std::complex<double>;

namespace fourier {

struct MultiIndex {
  std::vector<int> k;
  int j = 0;
};

// (theta-parity, x-parity) of a component: EvenOdd means even in theta, odd in x.
enum class Parity { EvenEven, EvenOdd, OddEven, OddOdd, None };

bool theta_odd(Parity p);
bool x_odd(Parity p);
Parity make_parity(bool theta_odd, bool x_odd);

const char* to_string(Parity p);
Parity parity_from_string(const std::string& s);

struct NormParams {
  double rho = 0.05;
  int m = 0;
  double nu = 0.0;
  double kappa = 1.0;
};

// Finitely supported table z(theta, x) = sum c[k, j] exp(2 pi i (k.theta + j x)),
// d components, |k|_1 <= kt, |j| <= kx. Stored densely over the box
// [-kt, kt]^l x [-kx, kx]; entries outside the l1 ball stay zero.
class TorusMap {
 public:
  TorusMap() = default;
  TorusMap(int l, int d, int kt, int kx);

  int l() const { return l_; }
  int d() const { return d_; }
  int kt() const { return kt_; }
  int kx() const { return kx_; }
  int nk() const { return nk_; }
  int nj() const { return 2 * kx_ + 1; }

  bool in_range(const std::vector<int>& k, int j) const;
  int kindex(const std::vector<int>& k) const;
  std::vector<int> kvec(int kidx) const;
  int kabs(int kidx) const { return kabs_[kidx]; }

  cplx& at(int comp, int kidx, int j) { return c_[(static_cast<size_t>(comp) * nk_ + kidx) * nj() + (j + kx_)]; }
  const cplx& at(int comp, int kidx, int j) const { return c_[(static_cast<size_t>(comp) * nk_ + kidx) * nj() + (j + kx_)]; }
  cplx get(int comp, const std::vector<int>& k, int j) const;
  void set(int comp, const std::vector<int>& k, int j, cplx v);
  // convenience for l == 1
  cplx get1(int comp, int k, int j) const { return get(comp, {k}, j); }
  void set1(int comp, int k, int j, cplx v) { set(comp, {k}, j, v); }

  std::vector<cplx>& data() { return c_; }
  const std::vector<cplx>& data() const { return c_; }

  std::vector<Parity>& parity() { return parity_; }
  const std::vector<Parity>& parity() const { return parity_; }

  int zero_k() const { return zero_k_; }
  int neg_k(int kidx) const { return neg_[kidx]; }

  TorusMap component(int comp) const;
  void set_component(int comp, const TorusMap& src);

  TorusMap& operator+=(const TorusMap& o);
  TorusMap& operator-=(const TorusMap& o);
  TorusMap& operator*=(double s);
  TorusMap& operator*=(cplx s);

  double max_abs() const;

 private:
  int l_ = 0, d_ = 0, kt_ = 0, kx_ = 0, nk_ = 0, zero_k_ = 0;
  std::vector<cplx> c_;
  std::vector<int> kabs_;
  std::vector<int> neg_;
  std::vector<Parity> parity_;
};

TorusMap operator+(TorusMap a, const TorusMap& b);
TorusMap operator-(TorusMap a, const TorusMap& b);
TorusMap operator*(double s, TorusMap a);

struct TruncationReport {
  double tail_l2 = 0.0;
};

// Copy into radii (kt, kx), zero padded or truncated; discarded l2 mass is reported.
TorusMap resize(const TorusMap& a, int kt, int kx, TruncationReport* tail = nullptr);

// Exact componentwise product on the padded support (no aliasing).
TorusMap product(const TorusMap& a, const TorusMap& b);

TorusMap partial_x(const TorusMap& a, int order);
TorusMap omega_derivative(const TorusMap& a, const std::vector<double>& omega);
TorusMap partial_theta(const TorusMap& a, int dir);

// Component norms: sum_k exp(2 pi rho |k|_1) (sum_j |c|^2 exp(4 pi rho |j|)(|j|^{2m} + 1))^{1/2}.
double norm_rho_m(const TorusMap& a, int comp, double rho, int m);
double norm_rho_m(const TorusMap& a, const NormParams& p, int comp = 0);

std::vector<double> sup_norm_strip(const TorusMap& a, double rho);

std::vector<cplx> average(const TorusMap& a);

TorusMap phase_shift(const TorusMap& a, const std::vector<double>& tau);

// Largest |c(-k,-j) - conj c(k,j)|.
double reality_defect(const TorusMap& a);
void symmetrize_reality(TorusMap& a);

// Parity flag inferred from coefficients with tolerance.
Parity detect_parity(const TorusMap& a, int comp, double tol = 1e-13);
void refresh_parity(TorusMap& a, double tol = 1e-13);

// Pointwise evaluation at real (theta, x); used by tests and diagnostics.
cplx evaluate(const TorusMap& a, int comp, const std::vector<double>& theta, double x);

double neumaier_sum(const std::vector<double>& v);

}  // namespace fourier
}  // namespace bsq
