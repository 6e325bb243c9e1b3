#include "bsq/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "bsq/error.hpp"
#include "bsq/models.hpp"
#include "bsq/serialize.hpp"

namespace bsq::config {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

[[noreturn]] void bad(const std::string& src, int line, const std::string& msg) {
  fail(ErrorKind::Config, src + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& v, const std::string& src, int line) {
  double x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) bad(src, line, "expected a number, got '" + v + "'");
  return x;
}

long long to_int(const std::string& v, const std::string& src, int line) {
  long long x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) bad(src, line, "expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, const std::string& src, int line) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  bad(src, line, "expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v, const std::string& src, int line) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(v);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) bad(src, line, "empty list item");
    out.push_back(to_double(item, src, line));
  }
  if (out.empty()) bad(src, line, "empty list");
  return out;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

}  // namespace

Table parse_ini(const std::string& text, const std::string& source) {
  Table t;
  std::stringstream ss(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    std::string s = raw;
    size_t cpos = s.find_first_of("#;");
    if (cpos != std::string::npos) s = s.substr(0, cpos);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') bad(source, line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) bad(source, line, "empty section name");
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) bad(source, line, "expected key = value");
    std::string key = trim(s.substr(0, eq)), val = trim(s.substr(eq + 1));
    if (key.empty()) bad(source, line, "missing key");
    if (section.empty()) bad(source, line, "key '" + key + "' outside any section");
    std::string full = section + "." + key;
    if (t.count(full)) bad(source, line, "duplicate key '" + full + "' (first at line " + std::to_string(t[full].line) + ")");
    t[full] = {val, line};
  }
  return t;
}

RunConfig load(const std::string& text, const std::string& source) {
  Table t = parse_ini(text, source);
  RunConfig c;
  c.source = source;
  using Setter = std::function<void(const Entry&)>;
  auto D = [&](double& f) { return Setter([&f, &source](const Entry& e) { f = to_double(e.value, source, e.line); }); };
  auto I = [&](int& f) {
    return Setter([&f, &source](const Entry& e) { f = static_cast<int>(to_int(e.value, source, e.line)); });
  };
  auto B = [&](bool& f) { return Setter([&f, &source](const Entry& e) { f = to_bool(e.value, source, e.line); }); };
  auto S = [&](std::string& f) { return Setter([&f](const Entry& e) { f = e.value; }); };
  auto L = [&](std::vector<double>& f) {
    return Setter([&f, &source](const Entry& e) { f = to_list(e.value, source, e.line); });
  };
  std::map<std::string, Setter> schema = {
      {"model.name", S(c.model)},
      {"model.mu", D(c.mu)},
      {"model.m", I(c.m)},
      {"torus.k_theta", I(c.k_theta)},
      {"torus.k_x", I(c.k_x)},
      {"torus.rho0", D(c.rho0)},
      {"torus.nu", D(c.nu)},
      {"lindstedt.order", I(c.order)},
      {"lindstedt.amplitudes", L(c.amplitudes)},
      {"lindstedt.epsilon", D(c.epsilon)},
      {"lindstedt.epsilon_grid", L(c.epsilon_grid)},
      {"lindstedt.omega", Setter([&](const Entry& e) { c.omega = to_double(e.value, source, e.line); })},
      {"tolerances.tau_proj", D(c.tau_proj)},
      {"tolerances.tau_fp", D(c.tau_fp)},
      {"tolerances.tau_tail", D(c.tau_tail)},
      {"tolerances.tau_avg", D(c.tau_avg)},
      {"tolerances.newton_tol", D(c.newton_tol)},
      {"newton.max_iter", I(c.max_iter)},
      {"newton.delta1", D(c.delta1)},
      {"newton.halving", D(c.halving)},
      {"newton.use_duhamel", B(c.use_duhamel)},
      {"newton.warm_start", B(c.warm_start)},
      {"newton.refresh_every", I(c.refresh_every)},
      {"newton.rates_per_step", B(c.rates_per_step)},
      {"uniqueness.tau0", D(c.tau0)},
      {"validate.torus", S(c.torus)},
      {"validate.noise", D(c.noise)},
      {"output.dir", S(c.out_dir)},
      {"random.seed", Setter([&](const Entry& e) {
         long long v = to_int(e.value, source, e.line);
         if (v < 0) bad(source, e.line, "seed must be non-negative");
         c.seed = static_cast<unsigned long long>(v);
       })},
  };
  for (const auto& [key, e] : t) {
    auto it = schema.find(key);
    if (it == schema.end()) bad(source, e.line, "unknown key '" + key + "'");
    it->second(e);
  }
  auto check = [&](bool ok, const std::string& key, const std::string& msg) {
    if (ok) return;
    int line = t.count(key) ? t[key].line : 0;
    bad(source, line, key + ": " + msg);
  };
  check(c.model == "scalar" || c.model == "system" || c.model == "boussinesq-scalar" || c.model == "boussinesq-system",
        "model.name", "unknown model '" + c.model + "'");
  check(c.mu >= 0, "model.mu", "must be positive");
  check(c.m >= 1, "model.m", "must be >= 1");
  check(c.k_theta >= 1, "torus.k_theta", "must be >= 1");
  check(c.k_x >= 2, "torus.k_x", "must be >= 2");
  check(c.rho0 > 0, "torus.rho0", "must be > 0");
  check(c.nu >= 0, "torus.nu", "must be >= 0");
  check(c.order >= 1, "lindstedt.order", "must be >= 1");
  check(c.epsilon > 0, "lindstedt.epsilon", "must be > 0");
  for (double e : c.epsilon_grid) check(e > 0, "lindstedt.epsilon_grid", "entries must be > 0");
  check(c.tau_proj > 0, "tolerances.tau_proj", "must be > 0");
  check(c.tau_fp > 0, "tolerances.tau_fp", "must be > 0");
  check(c.tau_tail > 0 && c.tau_tail < 1, "tolerances.tau_tail", "must be in (0, 1)");
  check(c.tau_avg > 0, "tolerances.tau_avg", "must be > 0");
  check(c.newton_tol > 0, "tolerances.newton_tol", "must be > 0");
  check(c.max_iter >= 0, "newton.max_iter", "must be >= 0");
  check(c.delta1 >= 0 && c.delta1 * 6 < c.rho0, "newton.delta1", "must satisfy 0 <= delta1 < rho0 / 6");
  check(c.halving > 0 && c.halving <= 0.5, "newton.halving", "must be in (0, 0.5]");
  check(c.refresh_every >= 1, "newton.refresh_every", "must be >= 1");
  check(c.noise >= 0, "validate.noise", "must be >= 0");
  return c;
}

RunConfig load_file(const std::string& path) { return load(io::read_file(path), path); }

double resolved_mu(const RunConfig& c) { return c.mu > 0 ? c.mu : 1.0 / (8 * std::numbers::pi * std::numbers::pi); }

void validate(const RunConfig& c) {
  auto model = models::make_model(c.model, resolved_mu(c), c.m);
  auto spec = models::center_analysis(*model);
  int jmax = 0;
  for (int j : spec.center_j) jmax = std::max(jmax, j);
  if (c.k_x < 2 * jmax + 2)
    fail(ErrorKind::Config, c.source + ": torus.k_x = " + std::to_string(c.k_x) + " must be >= 2 * (largest center j) + 2 = " +
                                std::to_string(2 * jmax + 2));
  if (spec.ell > 0 && static_cast<int>(c.amplitudes.size()) != spec.ell)
    fail(ErrorKind::Config, c.source + ": lindstedt.amplitudes needs " + std::to_string(spec.ell) + " entries");
}

std::string print(const RunConfig& c) {
  std::ostringstream o;
  o << "[model]\nname = " << c.model << "\nmu = " << fmt(resolved_mu(c)) << "\nm = " << c.m << "\n\n";
  o << "[torus]\nk_theta = " << c.k_theta << "\nk_x = " << c.k_x << "\nrho0 = " << fmt(c.rho0) << "\nnu = " << fmt(c.nu)
    << "\n\n";
  o << "[lindstedt]\norder = " << c.order << "\namplitudes = " << fmt_list(c.amplitudes) << "\nepsilon = " << fmt(c.epsilon)
    << "\nepsilon_grid = " << fmt_list(c.epsilon_grid) << "\n";
  if (c.omega) o << "omega = " << fmt(*c.omega) << "\n";
  o << "\n[tolerances]\ntau_proj = " << fmt(c.tau_proj) << "\ntau_fp = " << fmt(c.tau_fp) << "\ntau_tail = " << fmt(c.tau_tail)
    << "\ntau_avg = " << fmt(c.tau_avg) << "\nnewton_tol = " << fmt(c.newton_tol) << "\n\n";
  o << "[newton]\nmax_iter = " << c.max_iter << "\ndelta1 = " << fmt(c.delta1 > 0 ? c.delta1 : c.rho0 / 12)
    << "\nhalving = " << fmt(c.halving) << "\nuse_duhamel = " << (c.use_duhamel ? "true" : "false")
    << "\nwarm_start = " << (c.warm_start ? "true" : "false") << "\nrefresh_every = " << c.refresh_every
    << "\nrates_per_step = " << (c.rates_per_step ? "true" : "false") << "\n\n";
  o << "[uniqueness]\ntau0 = " << fmt(c.tau0) << "\n\n";
  o << "[validate]\ntorus = " << c.torus << "\nnoise = " << fmt(c.noise) << "\n\n";
  o << "[output]\ndir = " << c.out_dir << "\n\n";
  o << "[random]\nseed = " << c.seed << "\n";
  return o.str();
}

}  // namespace bsq::config
