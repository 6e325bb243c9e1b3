#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bsq/fourier.hpp"
#include "bsq/models.hpp"

namespace bsq::lindstedt {

using fourier::TorusMap;

// Scalar symbol of M0 = (omega0.d)^2 - d_xx - mu d_xxxx on cos(2 pi k.theta) cos(2 pi j x).
// For the system this is the determinant of the structured block below.
double multiplier(const models::Model& model, const std::vector<double>& omega0, const std::vector<int>& k, int j);

// System: omega0.d - A on the (cos cos, sin sin) coefficient pair, mapped to (sin cos, cos sin).
// Scalar: diag(F, F).
Eigen::Matrix2d multiplier_block(const models::Model& model, const std::vector<double>& omega0,
                                 const std::vector<int>& k, int j);

struct ResonantMode {
  std::vector<int> k;
  int j;
  double F;
};

struct NonresonanceReport {
  bool pass = true;
  int order = 0;
  double min_abs_F = 0;
  std::vector<int> argmin_k;
  int argmin_j = 0;
  std::vector<ResonantMode> resonant;
};

// Scans |k|_1 <= N, 1 <= j <= N outside the kernel set (+-e_i, j_i), j_i = i.
NonresonanceReport nonresonance_check(const models::Model& model, const std::vector<double>& omega0, int N,
                                      double rel_tol = 1e-9);

struct LindstedtSeries {
  models::ModelKind kind = models::ModelKind::Scalar;
  double mu = 0;
  int ell = 1;
  std::vector<double> omega0;
  std::vector<double> amplitudes;
  // Z[m-1] = (U_m, V_m); for the scalar model V_m is left zero (companion built at assembly)
  std::vector<TorusMap> Z;
  // omega[m-1] = omega^m for m = 1..N-1
  std::vector<std::vector<double>> omega;
  // largest kernel component of the order-m right-hand side before frequency matching
  std::vector<double> kernel_component;
  // largest kernel residue after matching (consistency check)
  std::vector<double> kernel_leftover;
  int order() const { return static_cast<int>(Z.size()); }
};

// Order-1 solution and frequency data; N = 1.
LindstedtSeries initial_series(const models::Model& model, const std::vector<double>& amplitudes, int max_order);

// Appends U_m and omega^{m-1}; m = series.order() + 1.
void lindstedt_step(const models::Model& model, LindstedtSeries& series);

LindstedtSeries build_series(const models::Model& model, int N, const std::vector<double>& amplitudes);

struct Seed {
  TorusMap K;
  std::vector<double> omega;
};

Seed assemble_seed(const models::Model& model, const LindstedtSeries& series, double eps, int kt, int kx);

}  // namespace bsq::lindstedt
