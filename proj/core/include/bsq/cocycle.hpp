#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bsq/hyperbolic.hpp"

namespace bsq::hyperbolic {

// Reduced cocycle of one bundle: dPhi/dt = Lambda(theta + omega t) Phi, fourth-order Magnus.
// Stable bundles are evolved forward (t >= 0) and unstable backward (t <= 0); the center
// accepts both signs.
Eigen::MatrixXcd cocycle_evolve(const SplittingData& sp, BundleKind b, double theta, double t, double h = 1e-3);

// Values at the requested times, which must share one sign and be sorted by |t|.
std::vector<Eigen::MatrixXcd> cocycle_track(const SplittingData& sp, BundleKind b, double theta,
                                            const std::vector<double>& times, double h = 1e-3);

// Physical cocycle V G(theta + omega t) Phi(t) (P^{-1} V^{-1})_a(theta) on the full fiber.
Eigen::MatrixXd cocycle_physical(const SplittingData& sp, BundleKind b, double theta, double t, double h = 1e-3);

struct RateOptions {
  double rho = 0.05;
  int n_theta = 8;
  double short_lo = 3e-3, short_hi = 2e-2;
  double tail_lo = 0.5, tail_hi = 5.0;
  int n_short = 24, n_tail = 24;
  double center_T = 50.0;
  int n_center = 51;
  double h = 2.5e-3;
  double h_center = 1e-2;
  bool center = true;
};

struct DecayFit {
  double logC = 0, beta = 0, alpha = 0, alpha_stderr = 0, residual = 0;
};

// Y -> X operator norms max_theta ||W_X U(theta, t) W_Y^{-1}|| at the given times.
std::vector<double> cocycle_norms(const SplittingData& sp, BundleKind b, const std::vector<double>& times,
                                  const RateOptions& opt);

// beta from log g = logC - beta t on the tail window; alpha from log g = c - b t - alpha log t on the short window.
DecayFit fit_decay(const std::vector<double>& t_short, const std::vector<double>& g_short,
                   const std::vector<double>& t_tail, const std::vector<double>& g_tail);

// log g = a + beta3 t + p log(1 + t); returns beta3.
double fit_growth(const std::vector<double>& t, const std::vector<double>& g);

Rates rate_estimate(const SplittingData& sp, const RateOptions& opt = {});

}  // namespace bsq::hyperbolic
