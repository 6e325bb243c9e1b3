// bsq: batch front end for the whiskered-torus solver.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bsq/center.hpp"
#include "bsq/config.hpp"
#include "bsq/error.hpp"
#include "bsq/lindstedt.hpp"
#include "bsq/models.hpp"
#include "bsq/newton.hpp"
#include "bsq/parallel.hpp"
#include "bsq/serialize.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bsq;

namespace {

enum Exit { kOk = 0, kValidation = 2, kNumerical = 3, kConfig = 4 };

struct Globals {
  std::string config_path;
  std::string out;
  int threads = 0;
  bool force = false;
  bool verbose = false;
  bool print_config = false;
  std::string resume;
  std::string seed_path;
  std::string torus_path;
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::Io:
      return kConfig;
    case ErrorKind::PrecheckFailed:
    case ErrorKind::DegenerateParameter:
    case ErrorKind::Resonant:
    case ErrorKind::AlignmentFailure:
      return kValidation;
    default:
      return kNumerical;
  }
}

void log(const Globals& g, const char* fmt, auto... args) {
  if (!g.verbose) return;
  std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

std::string model_name(const models::Model& m) { return m.name(); }

std::string out_path(const config::RunConfig& c, const std::string& file) {
  fs::create_directories(c.out_dir);
  return (fs::path(c.out_dir) / file).string();
}

std::string csv_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Setup {
  std::unique_ptr<models::Model> model;
  lindstedt::LindstedtSeries series;
  lindstedt::Seed seed;
};

Setup make_seed(const config::RunConfig& c, double eps) {
  Setup s;
  s.model = models::make_model(c.model, config::resolved_mu(c), c.m);
  s.series = lindstedt::build_series(*s.model, c.order, c.amplitudes);
  s.seed = lindstedt::assemble_seed(*s.model, s.series, eps, c.k_theta, c.k_x);
  if (c.omega) s.seed.omega = {*c.omega};
  return s;
}

newton::NewtonOptions newton_options(const config::RunConfig& c, const Globals& g) {
  newton::NewtonOptions o;
  o.schedule.rho0 = c.rho0;
  o.schedule.delta1 = c.delta1;
  o.schedule.halving = c.halving;
  o.tol = c.newton_tol;
  o.max_iter = c.max_iter;
  o.nu = c.nu;
  o.use_duhamel = c.use_duhamel;
  o.warm_start = c.warm_start;
  o.refresh_every = c.refresh_every;
  o.measure_rates = c.rates_per_step;
  o.force = g.force;
  o.tau_avg = c.tau_avg;
  o.split.tau_proj = c.tau_proj;
  o.split.tau_fp = c.tau_fp;
  o.quad.tau_tail = c.tau_tail;
  return o;
}

std::string torus_with_omega(const fourier::TorusMap& K, const std::vector<double>& omega) {
  auto j = nlohmann::json::parse(io::torus_to_json(K));
  j["omega"] = omega;
  return j.dump(1) + "\n";
}

int cmd_spectrum(const config::RunConfig& c, const Globals& g) {
  auto model = models::make_model(c.model, config::resolved_mu(c), c.m);
  auto r = models::center_analysis(*model, c.k_x);
  io::write_file(out_path(c, "spectrum.json"), io::spectrum_json(r));
  std::string csv = "j,sigma_re,sigma_im,class\n";
  for (const auto& m : r.modes)
    csv += std::to_string(m.j) + "," + csv_num(m.sigma_plus.real()) + "," + csv_num(m.sigma_plus.imag()) + "," +
           models::to_string(m.cls) + "\n";
  io::write_file(out_path(c, "spectrum.csv"), csv);
  log(g, "ell = %d, omega0 = %.15g", r.ell, r.omega0.empty() ? 0.0 : r.omega0[0]);
  return kOk;
}

int cmd_lindstedt(const config::RunConfig& c, const Globals& g) {
  auto model = models::make_model(c.model, config::resolved_mu(c), c.m);
  auto spec = models::center_analysis(*model);
  auto nr = lindstedt::nonresonance_check(*model, spec.omega0, c.order);
  if (!nr.pass) {
    std::fprintf(stderr, "nonresonance fails at order %d:", c.order);
    for (const auto& r : nr.resonant) {
      std::string k;
      for (int x : r.k) k += (k.empty() ? "" : ",") + std::to_string(x);
      std::fprintf(stderr, " (k=(%s), j=%d)", k.c_str(), r.j);
    }
    std::fputc('\n', stderr);
    return kValidation;
  }
  auto series = lindstedt::build_series(*model, c.order, c.amplitudes);
  io::write_file(out_path(c, "series.json"), io::series_json(series));
  auto seed = lindstedt::assemble_seed(*model, series, c.epsilon, c.k_theta, c.k_x);
  io::write_file(out_path(c, "seed.json"), torus_with_omega(seed.K, seed.omega));
  std::vector<double> le, lr;
  for (double e : c.epsilon_grid) {
    auto s = lindstedt::assemble_seed(*model, series, e, c.k_theta, c.k_x);
    double r = models::norm_Y(*model, models::residual(*model, s.K, s.omega), c.rho0);
    le.push_back(std::log(e));
    lr.push_back(std::log(r));
  }
  double slope = 0;
  if (le.size() >= 2) {
    Eigen::MatrixXd X(le.size(), 2);
    Eigen::VectorXd y(le.size());
    for (size_t i = 0; i < le.size(); ++i) {
      X(i, 0) = 1;
      X(i, 1) = le[i];
      y(i) = lr[i];
    }
    slope = X.colPivHouseholderQr().solve(y)(1);
  }
  std::string csv = "epsilon,residual_Y,fitted_slope\n";
  for (size_t i = 0; i < le.size(); ++i)
    csv += csv_num(c.epsilon_grid[i]) + "," + csv_num(std::exp(lr[i])) + "," + csv_num(slope) + "\n";
  io::write_file(out_path(c, "lindstedt_slope.csv"), csv);
  log(g, "order %d slope %.4f", c.order, slope);
  return kOk;
}

int cmd_kam_run(const config::RunConfig& c, const Globals& g) {
  auto s = make_seed(c, c.epsilon);
  fourier::TorusMap K0 = s.seed.K;
  std::vector<double> omega = s.seed.omega;
  if (!g.seed_path.empty()) {
    std::string text = io::read_file(g.seed_path);
    K0 = io::torus_from_json(text);
    auto j = nlohmann::json::parse(text);
    if (j.contains("omega") && !c.omega) omega = j["omega"].get<std::vector<double>>();
  }
  auto opt = newton_options(c, g);
  opt.on_step = [&](const newton::NewtonState& st) {
    io::write_file(out_path(c, "state_" + std::to_string(st.m) + ".json"), io::state_to_json(st));
    log(g, "step %d  resid %.3e -> %.3e", st.m, st.reports.back().resid_Y, st.reports.back().resid_next);
  };
  std::optional<newton::NewtonState> resume;
  if (!g.resume.empty()) {
    resume = io::state_from_json(io::read_file(g.resume));
    omega = resume->omega;
  }
  auto rep = newton::run(*s.model, K0, omega, opt, resume ? &*resume : nullptr);
  io::write_file(out_path(c, "K_final.json"), torus_with_omega(rep.K_final, rep.omega));
  io::RunMeta meta{model_name(*s.model), config::resolved_mu(c), c.epsilon, c.order, "K_final.json"};
  io::write_file(out_path(c, "run_report.json"), io::run_json(meta, rep));
  std::string csv = "m,rho,resid_Y\n";
  for (size_t i = 0; i < rep.residuals.size(); ++i)
    csv += std::to_string(i) + "," + csv_num(opt.schedule.rho(static_cast<int>(i) + 1)) + "," + csv_num(rep.residuals[i]) + "\n";
  io::write_file(out_path(c, "residuals.csv"), csv);
  if (rep.heuristic_override) std::fprintf(stderr, "warning: precheck failed, ran with --force (heuristic)\n");
  log(g, "converged %d after %zu steps, final residual %.3e", rep.converged, rep.steps.size(), rep.residuals.back());
  return rep.converged ? kOk : kNumerical;
}

int cmd_validate(const config::RunConfig& c, const Globals& g) {
  std::string path = !g.torus_path.empty() ? g.torus_path : c.torus;
  if (path.empty()) fail(ErrorKind::Config, c.source + ": validate.torus (or --torus) is required");
  std::string text = io::read_file(path);
  auto K = io::torus_from_json(text);
  auto model = models::make_model(c.model, config::resolved_mu(c), c.m);
  std::vector<double> omega;
  auto j = nlohmann::json::parse(text);
  if (c.omega)
    omega = {*c.omega};
  else if (j.contains("omega"))
    omega = j["omega"].get<std::vector<double>>();
  else
    omega = models::center_analysis(*model).omega0;
  if (c.noise > 0) {
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> nd;
    for (int comp = 0; comp < K.d(); ++comp)
      for (int ki = 0; ki < K.nk(); ++ki)
        for (int jj = -K.kx(); jj <= K.kx(); ++jj) K.at(comp, ki, jj) += c.noise * std::complex<double>(nd(rng), nd(rng));
    fourier::symmetrize_reality(K);
    K = models::enforce_constraints(*model, K);
  }
  newton::AposterioriOptions ao;
  ao.schedule.rho0 = c.rho0;
  ao.schedule.delta1 = c.delta1;
  ao.nu = c.nu;
  ao.tau_proj = c.tau_proj;
  auto L = newton::aposteriori_check(*model, K, omega, ao);
  io::write_file(out_path(c, "ledger.json"), io::ledger_json(L));
  std::string csv = "name,value,threshold,pass\n";
  for (const auto& l : L.lines)
    csv += l.name + "," + csv_num(l.value) + "," + csv_num(l.threshold) + "," + (l.pass ? "green" : "red") + "\n";
  io::write_file(out_path(c, "ledger.csv"), csv);
  for (const auto& l : L.lines) log(g, "%-18s %-5s %.3e (threshold %.3e)", l.name.c_str(), l.pass ? "green" : "red", l.value, l.threshold);
  return L.pass ? kOk : kValidation;
}

int cmd_uniqueness(const config::RunConfig& c, const Globals& g) {
  auto s = make_seed(c, c.epsilon);
  auto opt = newton_options(c, g);
  opt.precheck_rates = false;
  auto r1 = newton::run(*s.model, s.seed.K, s.seed.omega, opt);
  auto K2 = fourier::phase_shift(s.seed.K, {c.tau0});
  auto r2 = newton::run(*s.model, K2, s.seed.omega, opt);
  nlohmann::json j = {{"tau0", c.tau0}, {"converged", {r1.converged, r2.converged}}};
  int code = kOk;
  try {
    auto al = newton::phase_align(*s.model, r1.K_final, r2.K_final, {c.rho0, 1e-6, 50});
    j["tau_star"] = al.tau;
    j["distance"] = al.distance;
    j["relative"] = al.relative;
    j["aligned"] = true;
    log(g, "tau* = %.15f, distance %.3e", al.tau, al.distance);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::AlignmentFailure) throw;
    j["aligned"] = false;
    j["error"] = e.what();
    code = kValidation;
  }
  io::write_file(out_path(c, "uniqueness.json"), j.dump(2) + "\n");
  if (!r1.converged || !r2.converged) code = kNumerical;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bsq: quasi-periodic whiskered tori of ill-posed Boussinesq equations"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "configuration file");
  app.add_option("--out", g.out, "output directory (overrides [output] dir)");
  app.add_option("--threads", g.threads, "worker thread cap")->check(CLI::NonNegativeNumber);
  app.add_flag("--force", g.force, "run even when the a-posteriori precheck fails");
  app.add_flag("--verbose", g.verbose, "progress on stderr");
  app.add_flag("--print-config", g.print_config, "print the effective configuration and exit");
  auto* sp = app.add_subcommand("spectrum", "linear spectrum and center modes");
  auto* li = app.add_subcommand("lindstedt", "Lindstedt series, seed and residual slope");
  auto* kr = app.add_subcommand("kam-run", "Newton iteration from a Lindstedt seed");
  kr->add_option("--resume", g.resume, "state file written by a previous run");
  kr->add_option("--seed", g.seed_path, "initial torus (JSON) instead of the Lindstedt seed");
  auto* va = app.add_subcommand("validate", "a-posteriori ledger of a torus file");
  va->add_option("--torus", g.torus_path, "torus file (JSON)");
  auto* un = app.add_subcommand("uniqueness", "runs from phase-shifted seeds and aligns them");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  if (app.get_subcommands().empty() && !g.print_config) {
    std::fputs("a subcommand is required\n", stderr);
    std::fputs(app.help().c_str(), stderr);
    return kConfig;
  }

  try {
    config::RunConfig c = g.config_path.empty() ? config::RunConfig{} : config::load_file(g.config_path);
    if (!g.out.empty()) c.out_dir = g.out;
    config::validate(c);
    if (g.print_config) {
      std::fputs(config::print(c).c_str(), stdout);
      return kOk;
    }
    if (g.threads > 0) parallel::set_max_threads(g.threads);
    if (sp->parsed()) return cmd_spectrum(c, g);
    if (li->parsed()) return cmd_lindstedt(c, g);
    if (kr->parsed()) return cmd_kam_run(c, g);
    if (va->parsed()) return cmd_validate(c, g);
    if (un->parsed()) return cmd_uniqueness(c, g);
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumerical;
  }
  return kOk;
}
