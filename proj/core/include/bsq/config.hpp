#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bsq::config {

// [section] / key = value text; '#' and ';' start comments.
struct Entry {
  std::string value;
  int line = 0;
};
using Table = std::map<std::string, Entry>;  // "section.key"

Table parse_ini(const std::string& text, const std::string& source);

struct RunConfig {
  std::string source = "<defaults>";
  // [model]
  std::string model = "scalar";
  double mu = 0;  // 0: 1 / (8 pi^2)
  int m = 3;
  // [torus]
  int k_theta = 16;
  int k_x = 16;
  double rho0 = 0.05;
  double nu = 0;
  // [lindstedt]
  int order = 3;
  std::vector<double> amplitudes{1.0};
  double epsilon = 1e-2;
  std::vector<double> epsilon_grid{1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2};
  std::optional<double> omega;  // override of omega_eps
  // [tolerances]
  double tau_proj = 1e-9;
  double tau_fp = 1e-10;
  double tau_tail = 1e-12;
  double tau_avg = 1e-14;
  double newton_tol = 1e-11;
  // [newton]
  int max_iter = 12;
  double delta1 = 0;  // 0: rho0 / 12
  double halving = 0.5;
  bool use_duhamel = false;
  bool warm_start = false;
  int refresh_every = 1;
  bool rates_per_step = false;
  // [uniqueness]
  double tau0 = 0.37;
  // [validate]
  std::string torus;
  double noise = 0;
  // [output]
  std::string out_dir = "out";
  // [random]
  unsigned long long seed = 1;
};

// Unknown keys, malformed values and failed invariants raise a config error naming source:line.
RunConfig load(const std::string& text, const std::string& source);
RunConfig load_file(const std::string& path);
// Model-dependent checks (Kx >= 2 max center j + 2, tolerances > 0).
void validate(const RunConfig& c);
std::string print(const RunConfig& c);

double resolved_mu(const RunConfig& c);

}  // namespace bsq::config
