#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "bsq/fourier.hpp"

namespace bsq::models {

using fourier::TorusMap;

enum class ModelKind { Scalar, System };
enum class XBasis { Cos, Sin };

struct SpaceIndices {
  int mX[2];
  int mY[2];
};

enum class ModeClass { Center, Stable, Unstable };
const char* to_string(ModeClass c);

struct ModeInfo {
  int j;
  cplx sigma_plus, sigma_minus;
  ModeClass cls;  // of the pair: center, or hyperbolic (stable/unstable pair)
};

struct SpectrumReport {
  double mu = 0;
  int ell = 0;
  std::vector<double> omega0;    // rotation numbers Im(sigma)/(2 pi)
  std::vector<double> sigma_im;  // angular frequencies Im(sigma)
  std::vector<int> center_j;
  std::vector<ModeInfo> modes;
  std::vector<Eigen::Vector2cd> center_vectors;  // (u_j, v_j) in the fiber basis
};

class Model {
 public:
  virtual ~Model() = default;

  virtual ModelKind kind() const = 0;
  virtual std::string name() const = 0;
  double mu() const { return mu_; }
  int m() const { return m_; }

  // Matrix acting on the exp(2 pi i j x) coefficients of (u, v).
  virtual Eigen::Matrix2cd linear_block(int j) const = 0;
  // Same operator on the real x-parity basis coefficients of mode j >= 1.
  virtual Eigen::Matrix2d fiber_block(int j) const = 0;
  virtual XBasis x_basis(int comp) const = 0;
  // Joint (theta, x) parity of the reversible tori.
  virtual fourier::Parity torus_parity(int comp) const = 0;
  virtual SpaceIndices spaces() const = 0;

  // Quadratic part N(z), exact on the padded support.
  virtual TorusMap nonlinearity(const TorusMap& z) const = 0;
  // DN(z) w, exact on the padded support.
  virtual TorusMap dnonlinearity(const TorusMap& z, const TorusMap& w) const = 0;

  // Omega(a, b) = <a, J b>_{L2} for theta-independent slices (kt = 0).
  virtual double symplectic_form(const TorusMap& a, const TorusMap& b) const = 0;
  virtual double hamiltonian(const TorusMap& z) const = 0;
  // Entry (slot, slot) of J in the real fiber basis: Omega(a, b) = a^T Jf b.
  virtual Eigen::MatrixXd fiber_symplectic(int kx) const = 0;

 protected:
  Model(double mu, int m);
  double mu_;
  int m_;
};

std::unique_ptr<Model> make_model(ModelKind kind, double mu, int m = 3);
std::unique_ptr<Model> make_model(const std::string& name, double mu, int m = 3);

// --- operations ---------------------------------------------------------

Eigen::Matrix2cd linear_block(const Model& model, int j);
std::pair<cplx, cplx> dispersion(const Model& model, int j);  // (sigma_+, sigma_-), Re sigma_+ >= 0
SpectrumReport center_analysis(const Model& model, int jmax = 64);

TorusMap apply_vectorfield(const Model& model, const TorusMap& z, fourier::TruncationReport* tail = nullptr);
TorusMap residual(const Model& model, const TorusMap& K, const std::vector<double>& omega,
                  fourier::TruncationReport* tail = nullptr);

double symplectic_form(const Model& model, const TorusMap& u, const TorusMap& v);
double hamiltonian(const Model& model, const TorusMap& z);

struct ConstraintOptions {
  bool theta_parity = false;  // also impose the reversible (theta, x) parity
};
TorusMap enforce_constraints(const Model& model, const TorusMap& z, ConstraintOptions opt = {});

// Product-space norms sum_k exp(2 pi rho |k|) (||z1_k||^2_{m1} + ||z2_k||^2_{m2})^{1/2}.
double norm_X(const Model& model, const TorusMap& z, double rho);
double norm_Y(const Model& model, const TorusMap& z, double rho);
double norm_indices(const TorusMap& z, double rho, const int m[2]);

// Real x-parity fiber basis, slots: u_j at j-1, v_j at kx + j - 1, j = 1..kx.
class Fiber {
 public:
  Fiber(const Model& model, int kx);

  int kx() const { return kx_; }
  int dim() const { return 2 * kx_; }
  int slot(int comp, int j) const { return comp * kx_ + j - 1; }

  // rows k = -kt..kt (l = 1 tables only)
  Eigen::MatrixXcd to_fiber(const TorusMap& z) const;
  TorusMap from_fiber(const Eigen::MatrixXcd& rows, int kt) const;
  // a single fiber vector as a theta-independent slice
  TorusMap slice(const Eigen::VectorXd& v) const;
  Eigen::VectorXd slice_to_fiber(const TorusMap& s) const;

  Eigen::VectorXd weights(double rho, const int m[2]) const;
  Eigen::VectorXd weights_X(double rho) const;
  Eigen::VectorXd weights_Y(double rho) const;

  const Eigen::MatrixXd& A0() const { return a0_; }
  const Eigen::MatrixXd& J() const { return j_; }
  // L2 inner product of fiber vectors is l2_factor() times the Euclidean one.
  static constexpr double l2_factor() { return 0.5; }
  const Model& model() const { return *model_; }

 private:
  const Model* model_;
  int kx_;
  Eigen::MatrixXd a0_;
  Eigen::MatrixXd j_;
};

}  // namespace bsq::models
