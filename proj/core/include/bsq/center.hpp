#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bsq/fourier.hpp"
#include "bsq/hyperbolic.hpp"
#include "bsq/models.hpp"

namespace bsq::center {

using fourier::TorusMap;

struct DiophantineReport {
  std::vector<double> omega;
  double nu = 0;
  int kmax = 0;
  double kappa_hat = 0;
  std::vector<int> argmax_k;
};

// kappa_hat = max over 0 < |k|_1 <= kmax of (|omega.k| |k|^nu)^{-1}
DiophantineReport diophantine_estimate(const std::vector<double>& omega, double nu, int kmax);

struct CohomologyReport {
  double avg_abs = 0;
  double ratio = 0;  // ||v||_{rho - delta} / ||h||_rho
  double bound = 0;  // kappa_hat delta^{-nu}
};

// omega.d v = h with avg(v) = 0; all components, all x-modes.
TorusMap cohomology_solve(const TorusMap& h, const std::vector<double>& omega, double rho, double delta,
                          double nu = 0.0, double tau_avg = 1e-10, CohomologyReport* rep = nullptr);

// L(theta) = DK^T J DK sampled on the grid (l x l antisymmetric per node).
struct IsotropyReport {
  std::vector<Eigen::MatrixXd> L;
  double norm = 0;
};
IsotropyReport isotropy_defect(const models::Model& model, const TorusMap& K, int kx, int ngrid);

// Automatic-reducibility frame on the center bundle (l = 1), sampled on the splitting grid.
// Orthonormalization and N use the energy metric G = sym(J A0) of the center fiber.
// The reduced equations omega.d xi1 + S xi2 = p1, omega.d xi2 + b22 xi2 = p2 keep the
// zero-average part of b22 through an integrating factor.
struct CenterFrame {
  int n = 0;
  double omega = 0;
  Eigen::MatrixXd Gmet;
  std::vector<Eigen::VectorXd> DK, DKc, W2, LDK, LW2;
  std::vector<Eigen::MatrixXd> Q;     // D x 2 metric-orthonormal center basis
  std::vector<Eigen::Matrix2d> Jc;    // Gram of the symplectic form on Q
  std::vector<Eigen::Matrix2d> mc;    // coordinates of M = [DKc, W2] in Q
  std::vector<Eigen::Matrix2d> Bred;  // M^{-1} (omega d - A) M
  std::vector<double> Nmat, S;
  // integrating factor exp(-B) with omega.dB = b22 - avg(b22); b22 is O(E) for Hamiltonian fields
  std::vector<double> expB;
  double b22_avg = 0;
  double avgS = 0;  // avg(S exp(-B))
  double avgS_inv_norm = 0;
  double cond_DKtDK = 1;
  double isotropy_norm = 0;
  double MtJM_defect = 0;
  double e1 = 0, e2 = 0;
};

struct FrameOptions {
  double twist_tol = 1e-12;
  double geometry_tol = 1e-12;
  double b22_avg_tol = 1e-8;
};

CenterFrame build_center_frame(const models::Model& model, const TorusMap& K, const hyperbolic::SplittingData& sp,
                               const FrameOptions& opt = {});

struct CenterSolveOptions {
  double residual_norm = 0;        // ||E|| of the current step, scales the exactness threshold
  double exactness_factor = 1e3;   // threshold factor * ||E||^{3/2} + tau_avg
  double tau_avg = 1e-14;
};

struct CenterSolution {
  std::vector<double> xi1, xi2;
  Eigen::MatrixXcd W;  // N x D grid field M xi
  double exactness_defect = 0;
  double avg_xi2 = 0;
};

// Solves (omega d - A) W = F on the center bundle up to quadratic error; F is an N x D grid field.
CenterSolution solve_center(const CenterFrame& frame, const hyperbolic::SplittingData& sp, const Eigen::MatrixXcd& F,
                            const CenterSolveOptions& opt = {});

// avg of DKc^T J F over the grid, the exactness quantity of the reduced equations
double exactness_average(const CenterFrame& frame, const models::Fiber& fiber, const Eigen::MatrixXcd& F);

}  // namespace bsq::center
