#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bsq/fourier.hpp"
#include "bsq/grid.hpp"
#include "bsq/models.hpp"

namespace bsq::hyperbolic {

using fourier::TorusMap;

// A(theta) = A0 + sum_k B_k exp(2 pi i k theta) on the real fiber basis (l = 1).
struct GalerkinOperator {
  int kx = 0;
  int kb = 0;
  Eigen::MatrixXd A0;
  std::vector<Eigen::MatrixXcd> B;  // B[k + kb]

  int dim() const { return static_cast<int>(A0.rows()); }
  Eigen::MatrixXcd eval(double theta) const;
  Eigen::MatrixXcd perturbation(double theta) const;
  // sup estimate sum_k exp(2 pi rho |k|) ||W_Y B_k W_X^{-1}||_2
  double perturbation_norm(const models::Fiber& fiber, double rho) const;
};

GalerkinOperator linearize(const models::Model& model, const TorusMap& K, int kx);
// Linearization of the quadratic part alone, DN(P), without the constant blocks.
GalerkinOperator linearize_perturbation(const models::Model& model, const TorusMap& P, int kx);

// Eigenvectors of the constant part, one 2x2 block per j: slot j-1 carries +sigma, slot kx+j-1 carries -sigma.
struct EigenBasis {
  Eigen::MatrixXcd V, Vinv;
  Eigen::VectorXcd lambda;
  std::vector<char> cls;  // 's', 'c', 'u'
  std::vector<int> slots(char c) const;
};

EigenBasis eigen_basis(const models::Fiber& fiber);

enum class BundleKind { Stable, Center, Unstable };
const char* to_string(BundleKind b);
char bundle_char(BundleKind b);

// Graph of a bundle over the K = 0 eigenbundle: x = V [I; M(theta)] y in eigen-coordinates.
struct Bundle {
  BundleKind kind = BundleKind::Center;
  std::vector<int> idx, cidx;
  std::vector<Eigen::MatrixXcd> M;    // per grid node, |cidx| x |idx|
  std::vector<Eigen::MatrixXcd> red;  // reduced generator Lambda_a + B_aa + B_ab M
  Eigen::MatrixXcd red_hat;           // Fourier coefficients of red, packed (rows k = -K..K)
  Eigen::MatrixXcd M_hat;             // same for M
  int iterations = 0;
  double contraction = 0;
  double fp_residual = 0;

  int rank() const { return static_cast<int>(idx.size()); }
  Eigen::MatrixXcd generator(double theta) const;
  Eigen::MatrixXcd graph(double theta) const;
};

struct Rates {
  double Ch = 0, b1 = 0, b2 = 0, b3p = 0, b3m = 0, a1 = 0, a2 = 0;
  double a1_stderr = 0, a2_stderr = 0;
  double fit_residual = 0;
};

struct SplittingOptions {
  double tau_proj = 1e-9;
  double tau_fp = 1e-10;
  int max_iter = 200;
  int grid_size = 0;  // 0: 4 kt + 2
};

struct SplittingData {
  const models::Model* model = nullptr;  // not owned
  int kx = 0;
  double omega = 0;
  grid::ThetaGrid grid{1};
  GalerkinOperator A;
  EigenBasis eig;
  Bundle s, c, u;
  std::vector<Eigen::MatrixXd> Ps, Pc, Pu;  // per grid node
  Rates rates;
  int rank_c = 0;
  double invariance_defect = 0;
  double proj_defect = 0;
  double strip_width = 0;  // fitted analyticity width of theta -> Pi

  const Bundle& bundle(BundleKind b) const;
  const std::vector<Eigen::MatrixXd>& projection(BundleKind b) const;
  int dim() const { return A.dim(); }
};

SplittingData unperturbed_splitting(const models::Model& model, int kx, double omega, int kt = 0);
SplittingData compute_splitting(const models::Model& model, const TorusMap& K, double omega, int kx,
                                const SplittingOptions& opt = {});
// Warm start from base.
SplittingData graph_transform_update(const SplittingData& base, const GalerkinOperator& A_new,
                                     const SplittingOptions& opt = {});

// Eigen-coordinate frame P(theta) = [G_s G_c G_u] at an arbitrary angle, and the
// physical embedding V G_a(theta) and reduction (P^{-1} V^{-1})_a of one bundle.
Eigen::MatrixXcd frame_at(const SplittingData& sp, double theta);
Eigen::MatrixXcd embedding_at(const SplittingData& sp, BundleKind b, double theta);
Eigen::MatrixXcd reduction_at(const SplittingData& sp, BundleKind b, double theta);
Eigen::MatrixXd projection_at(const SplittingData& sp, BundleKind b, double theta);

// Defect diagnostics on the grid.
double projection_defect(const SplittingData& sp);
double invariance_defect(const SplittingData& sp);
double fit_strip_width(const SplittingData& sp);

// Fiber fields sampled on the splitting grid are N x D matrices (rows = nodes).
Eigen::MatrixXcd apply_projection(const SplittingData& sp, BundleKind b, const Eigen::MatrixXcd& F);

struct QuadratureOptions {
  double tau_tail = 1e-12;
  double level_h = 1.0 / 16;  // tanh-sinh step
  double max_substep = 5e-3;
};

// Solve (omega d_theta - A) Delta = F on one hyperbolic bundle; F must lie in the bundle.
Eigen::MatrixXcd solve_hyperbolic_direct(const SplittingData& sp, BundleKind b, const Eigen::MatrixXcd& F);
Eigen::MatrixXcd solve_stable(const SplittingData& sp, const Eigen::MatrixXcd& F, const QuadratureOptions& q = {});
Eigen::MatrixXcd solve_unstable(const SplittingData& sp, const Eigen::MatrixXcd& F, const QuadratureOptions& q = {});
// One cocycle integration per node shared by all right-hand sides.
std::vector<Eigen::MatrixXcd> solve_duhamel_batch(const SplittingData& sp, BundleKind b,
                                                  const std::vector<Eigen::MatrixXcd>& F,
                                                  const QuadratureOptions& q = {});

// grid field -> fiber Fourier rows k = -K..K, and the weighted rho-norm of those rows
double fiber_norm(const Eigen::MatrixXcd& rows, const Eigen::VectorXd& w, double rho);
double grid_field_norm(const SplittingData& sp, const Eigen::MatrixXcd& F, const Eigen::VectorXd& w, double rho);

// Sup estimate sum_k exp(2 pi rho |k|) ||W_out Pi_k W_in^{-1}||_2 of a projection table.
double projection_norm(const SplittingData& sp, const std::vector<Eigen::MatrixXd>& P, const Eigen::VectorXd& w_out,
                       const Eigen::VectorXd& w_in, double rho);

}  // namespace bsq::hyperbolic
