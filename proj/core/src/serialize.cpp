#include "bsq/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bsq/error.hpp"
#include "json.hpp"

namespace bsq::io {

using nlohmann::json;
using cd = std::complex<double>;

namespace {

double num(const json& v) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  return v.get<double>();
}

json rates_json(const hyperbolic::Rates& r) {
  return {{"Ch", r.Ch}, {"b1", r.b1}, {"b2", r.b2}, {"b3p", r.b3p}, {"b3m", r.b3m}, {"a1", r.a1}, {"a2", r.a2},
          {"a1_stderr", r.a1_stderr}, {"a2_stderr", r.a2_stderr}, {"fit_residual", r.fit_residual}};
}

hyperbolic::Rates rates_from(const json& j) {
  hyperbolic::Rates r;
  r.Ch = num(j.at("Ch"));
  r.b1 = num(j.at("b1"));
  r.b2 = num(j.at("b2"));
  r.b3p = num(j.at("b3p"));
  r.b3m = num(j.at("b3m"));
  r.a1 = num(j.at("a1"));
  r.a2 = num(j.at("a2"));
  r.a1_stderr = num(j.at("a1_stderr"));
  r.a2_stderr = num(j.at("a2_stderr"));
  r.fit_residual = num(j.at("fit_residual"));
  return r;
}

json step_json(const newton::StepReport& s) {
  return {{"m", s.m},
          {"rho", s.rho},
          {"delta", s.delta},
          {"resid_Y", s.resid_Y},
          {"resid_next", s.resid_next},
          {"avgS", s.avgS},
          {"avgS_inv", s.avgS_inv},
          {"kappa_hat", s.kappa_hat},
          {"rates", rates_json(s.rates)},
          {"defects",
           {{"proj", s.proj_defect},
            {"invariance", s.invariance_defect},
            {"exactness", s.exactness_defect},
            {"isotropy", s.isotropy},
            {"e1", s.e1},
            {"e2", s.e2},
            {"MtJM", s.MtJM_defect},
            {"linear", s.linear_defect},
            {"enforcement", s.enforcement}}},
          {"strip_width", s.strip_width},
          {"graph_iterations", s.graph_iterations},
          {"delta_X", s.delta_X},
          {"refreshed", s.refreshed}};
}

newton::StepReport step_from(const json& j) {
  newton::StepReport s;
  s.m = j.at("m");
  s.rho = num(j.at("rho"));
  s.delta = num(j.at("delta"));
  s.resid_Y = num(j.at("resid_Y"));
  s.resid_next = num(j.at("resid_next"));
  s.avgS = num(j.at("avgS"));
  s.avgS_inv = num(j.at("avgS_inv"));
  s.kappa_hat = num(j.at("kappa_hat"));
  s.rates = rates_from(j.at("rates"));
  const json& d = j.at("defects");
  s.proj_defect = num(d.at("proj"));
  s.invariance_defect = num(d.at("invariance"));
  s.exactness_defect = num(d.at("exactness"));
  s.isotropy = num(d.at("isotropy"));
  s.e1 = num(d.at("e1"));
  s.e2 = num(d.at("e2"));
  s.MtJM_defect = num(d.at("MtJM"));
  s.linear_defect = num(d.at("linear"));
  s.enforcement = num(d.at("enforcement"));
  s.strip_width = num(j.at("strip_width"));
  s.graph_iterations = j.at("graph_iterations");
  s.delta_X = num(j.at("delta_X"));
  s.refreshed = j.at("refreshed");
  return s;
}

json torus_obj(const TorusMap& a) {
  json par = json::array();
  for (auto p : a.parity()) par.push_back(fourier::to_string(p));
  json entries = json::array();
  for (int ki = 0; ki < a.nk(); ++ki) {
    // kindex order is lexicographic in k, so the list is sorted by (k, j)
    for (int j = -a.kx(); j <= a.kx(); ++j) {
      bool nz = false;
      for (int c = 0; c < a.d(); ++c) nz = nz || a.at(c, ki, j) != 0.0;
      if (!nz) continue;
      json re = json::array(), im = json::array();
      for (int c = 0; c < a.d(); ++c) {
        re.push_back(a.at(c, ki, j).real());
        im.push_back(a.at(c, ki, j).imag());
      }
      entries.push_back({{"k", a.kvec(ki)}, {"j", j}, {"re", re}, {"im", im}});
    }
  }
  return {{"l", a.l()}, {"d", a.d()}, {"k_theta_max", a.kt()}, {"k_x_max", a.kx()}, {"parity", par},
          {"entries", entries}};
}

TorusMap torus_from(const json& j) {
  TorusMap a(j.at("l"), j.at("d"), j.at("k_theta_max"), j.at("k_x_max"));
  for (const auto& e : j.at("entries")) {
    std::vector<int> k = e.at("k");
    int jj = e.at("j");
    if (!a.in_range(k, jj)) fail(ErrorKind::Io, "torus entry outside the declared radii");
    for (int c = 0; c < a.d(); ++c) a.set(c, k, jj, cd(e.at("re").at(c).get<double>(), e.at("im").at(c).get<double>()));
  }
  const auto& par = j.at("parity");
  for (int c = 0; c < a.d() && c < static_cast<int>(par.size()); ++c)
    a.parity()[c] = fourier::parity_from_string(par.at(c).get<std::string>());
  return a;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, std::string("malformed JSON: ") + e.what());
  }
}

std::string dump(const json& j, int indent) { return j.dump(indent) + (indent >= 0 ? "\n" : ""); }

}  // namespace

std::string torus_to_json(const TorusMap& a, int indent) { return dump(torus_obj(a), indent); }

TorusMap torus_from_json(const std::string& text) {
  try {
    return torus_from(parse(text));
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, std::string("bad torus file: ") + e.what());
  }
}

std::string spectrum_json(const models::SpectrumReport& r) {
  json modes = json::array();
  for (const auto& m : r.modes)
    modes.push_back({{"j", m.j},
                     {"sigma_re", m.sigma_plus.real()},
                     {"sigma_im", m.sigma_plus.imag()},
                     {"class", models::to_string(m.cls)}});
  return dump({{"mu", r.mu}, {"ell", r.ell}, {"omega0", r.omega0}, {"sigma_im", r.sigma_im}, {"center_j", r.center_j},
               {"modes", modes}},
              2);
}

std::string series_json(const lindstedt::LindstedtSeries& s) {
  json orders = json::array();
  for (int m = 0; m < s.order(); ++m) {
    json o = {{"m", m + 1}, {"U", torus_obj(s.Z[m])}};
    if (m < static_cast<int>(s.omega.size())) o["omega"] = s.omega[m];
    orders.push_back(o);
  }
  return dump({{"model", s.kind == models::ModelKind::Scalar ? "boussinesq-scalar" : "boussinesq-system"},
               {"mu", s.mu},
               {"ell", s.ell},
               {"omega0", s.omega0},
               {"amplitudes", s.amplitudes},
               {"N", s.order()},
               {"kernel_component", s.kernel_component},
               {"kernel_leftover", s.kernel_leftover},
               {"orders", orders}},
              1);
}

std::string splitting_json(const hyperbolic::SplittingData& sp) {
  return dump({{"rank_c", sp.rank_c},
               {"rates", rates_json(sp.rates)},
               {"invariance_defect", sp.invariance_defect},
               {"proj_defect", sp.proj_defect},
               {"strip_width", sp.strip_width},
               {"grid", sp.grid.size()},
               {"iterations", {sp.s.iterations, sp.c.iterations, sp.u.iterations}}},
              2);
}

std::string twist_json(const center::CenterFrame& f, double exactness_defect) {
  return dump({{"avgS", f.avgS},
               {"avgS_inv_norm", f.avgS_inv_norm},
               {"cond_DKtDK", f.cond_DKtDK},
               {"isotropy_norm", f.isotropy_norm},
               {"exactness_defect", exactness_defect},
               {"e1", f.e1},
               {"e2", f.e2},
               {"b22_avg", f.b22_avg}},
              2);
}

namespace {
json ledger_obj(const newton::Ledger& l) {
  json lines = json::array();
  for (const auto& x : l.lines)
    lines.push_back({{"name", x.name}, {"value", x.value}, {"threshold", x.threshold}, {"pass", x.pass}, {"note", x.note}});
  return {{"heuristic", true},
          {"pass", l.pass},
          {"trivial", l.trivial},
          {"C", l.C},
          {"resid_Y", l.resid_Y},
          {"kappa_hat", l.kappa_hat},
          {"avgS_inv", l.avgS_inv},
          {"smallness1", l.smallness1},
          {"smallness2", l.smallness2},
          {"lines", lines}};
}
}  // namespace

std::string ledger_json(const newton::Ledger& l) { return dump(ledger_obj(l), 2); }

std::string run_json(const RunMeta& meta, const newton::RunReport& r) {
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back(step_json(s));
  json j = {{"model", meta.model},
            {"mu", meta.mu},
            {"omega", r.omega},
            {"epsilon", meta.epsilon},
            {"seed_order", meta.seed_order},
            {"steps", steps},
            {"residuals", r.residuals},
            {"converged", r.converged},
            {"heuristic_override", r.heuristic_override},
            {"distance_X", r.distance_X},
            {"distance_bound", r.distance_bound},
            {"final_isotropy", r.final_isotropy},
            {"quadratic_fit", {{"c", r.quad_c}, {"max_dev", r.quad_max_dev}, {"pairs", r.quad_pairs}}},
            {"K_final_ref", meta.K_final_ref}};
  if (r.precheck) j["precheck"] = ledger_obj(*r.precheck);
  return dump(j, 2);
}

std::string state_to_json(const newton::NewtonState& st) {
  json reps = json::array();
  for (const auto& s : st.reports) reps.push_back(step_json(s));
  return dump({{"m", st.m},
               {"omega", st.omega},
               {"kx", st.kx},
               {"residuals", st.residuals},
               {"increases", st.increases},
               {"reports", reps},
               {"K", torus_obj(st.K)}},
              -1);
}

newton::NewtonState state_from_json(const std::string& text) {
  json j = parse(text);
  try {
    newton::NewtonState st;
    st.m = j.at("m");
    st.omega = j.at("omega").get<std::vector<double>>();
    st.kx = j.at("kx");
    for (const auto& v : j.at("residuals")) st.residuals.push_back(num(v));
    st.increases = j.at("increases");
    for (const auto& r : j.at("reports")) st.reports.push_back(step_from(r));
    st.K = torus_from(j.at("K"));
    return st;
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, std::string("bad state file: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed for " + path);
}

}  // namespace bsq::io
