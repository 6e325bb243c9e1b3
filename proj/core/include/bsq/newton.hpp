#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bsq/center.hpp"
#include "bsq/cocycle.hpp"
#include "bsq/fourier.hpp"
#include "bsq/hyperbolic.hpp"
#include "bsq/models.hpp"

namespace bsq::newton {

using fourier::TorusMap;

// rho_1 = rho0, rho_{m+1} = rho_m - 3 delta_m, delta_{m+1} = halving * delta_m.
struct Schedule {
  double rho0 = 0.05;
  double delta1 = 0;  // 0: rho0 / 12
  double halving = 0.5;

  double first_delta() const { return delta1 > 0 ? delta1 : rho0 / 12; }
  double rho_inf() const { return rho0 - 6 * first_delta(); }
  double rho(int m) const;    // m >= 1
  double delta(int m) const;  // m >= 1
};

struct NewtonState;

struct NewtonOptions {
  Schedule schedule;
  double tol = 1e-11;
  double floor = 1e-12;  // absolute stopping floor
  int max_iter = 12;
  double nu = 0;
  bool use_duhamel = false;
  bool warm_start = false;  // cold graph iteration keeps resumed runs bit-identical
  int refresh_every = 1;  // 2: lagged splitting refresh
  bool theta_parity = false;
  bool force = false;     // run even when the precheck fails
  bool precheck = true;
  double exactness_factor = 1e3;
  double tau_avg = 1e-14;
  hyperbolic::SplittingOptions split;
  hyperbolic::QuadratureOptions quad;
  bool measure_rates = false;  // cocycle rate fit on every step
  hyperbolic::RateOptions rate_opt;
  bool precheck_rates = true;
  std::function<void(const NewtonState&)> on_step;  // called after every completed step
};

struct StepReport {
  int m = 0;
  double rho = 0, delta = 0;
  double resid_Y = 0;
  double resid_next = 0;  // residual of K_{m+1} at rho_{m+1}
  double avgS = 0, avgS_inv = 0;
  double kappa_hat = 0;
  hyperbolic::Rates rates;
  double proj_defect = 0, invariance_defect = 0, strip_width = 0;
  int graph_iterations = 0;
  double exactness_defect = 0;
  double isotropy = 0;
  double e1 = 0, e2 = 0;
  double MtJM_defect = 0;
  double delta_X = 0;        // ||Delta||_X at rho - 2 delta
  double enforcement = 0;    // ||enforce(K + Delta) - (K + Delta)||_X
  double linear_defect = 0;  // ||(omega d - A) Delta - F||_Y / ||F||_Y
  bool refreshed = true;
};

struct NewtonState {
  int m = 0;  // steps taken
  TorusMap K;
  std::vector<double> omega;
  int kx = 0;
  std::vector<double> residuals;  // ||E_i||_Y at rho_{i+1}
  std::shared_ptr<const hyperbolic::SplittingData> splitting;
  std::shared_ptr<const center::CenterFrame> frame;
  std::vector<StepReport> reports;
  int increases = 0;
};

NewtonState initial_state(const models::Model& model, const TorusMap& K0, const std::vector<double>& omega,
                          const Schedule& schedule = {});

// One quasi-Newton correction. Sub-solver errors propagate with the step index prepended.
NewtonState newton_step(const models::Model& model, const NewtonState& state, const NewtonOptions& opt = {});

struct LedgerLine {
  std::string name;
  double value = 0;
  double threshold = 0;
  bool pass = true;
  std::string note;
};

struct AposterioriOptions {
  Schedule schedule;
  double nu = 0;
  double ball_radius = 1.0;  // heuristic r of the analyticity ball
  double tau_proj = 1e-9;
  double isotropy_factor = 10;
  bool measure_rates = true;
  hyperbolic::RateOptions rates;
};

struct Ledger {
  std::vector<LedgerLine> lines;
  double C = 0;  // composed heuristic constant
  double resid_Y = 0, kappa_hat = 0, avgS_inv = 0;
  double smallness1 = 0, smallness2 = 0;
  bool trivial = false;
  bool pass = false;
};

// Heuristic (non-rigorous) evaluation of the smallness conditions.
Ledger aposteriori_check(const models::Model& model, const TorusMap& K, const std::vector<double>& omega,
                         const AposterioriOptions& opt = {});

struct RunReport {
  std::vector<StepReport> steps;
  std::vector<double> residuals;
  bool converged = false;
  bool heuristic_override = false;  // ran with force after a failed precheck
  std::optional<Ledger> precheck;
  TorusMap K_final;
  std::vector<double> omega;
  double distance_X = 0;        // ||K_inf - K_0||_X at rho_inf
  double distance_bound = 0;    // C |avgS^{-1}|^2 kappa^2 delta^{-2 nu} ||E_0||
  double final_isotropy = 0;
  // quadratic fit log E_{m+1} = 2 log E_m + c over steps above the round-off floor
  double quad_c = 0, quad_max_dev = 0;
  int quad_pairs = 0;
};

RunReport run(const models::Model& model, const TorusMap& K0, const std::vector<double>& omega,
              const NewtonOptions& opt = {}, const NewtonState* resume = nullptr);

struct QuadraticFit {
  double c = 0;
  double max_dev = 0;  // log10 units
  int pairs = 0;
};
QuadraticFit quadratic_fit(const std::vector<double>& residuals, double roundoff_floor = 1e-14);

struct AlignOptions {
  double rho = 0.05;
  double rel_tol = 1e-6;
  int max_iter = 50;
};

struct Alignment {
  double tau = 0;
  double distance = 0;  // ||K2 - K1(. + tau)||_X
  double relative = 0;
  int iterations = 0;
};

// tau with K2 ~ phase_shift(K1, tau); weighted least squares refined by Newton on tau.
Alignment phase_align(const models::Model& model, const TorusMap& K1, const TorusMap& K2,
                      const AlignOptions& opt = {});

}  // namespace bsq::newton
