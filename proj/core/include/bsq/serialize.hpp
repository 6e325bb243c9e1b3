#pragma once

#include <string>

#include "bsq/center.hpp"
#include "bsq/fourier.hpp"
#include "bsq/hyperbolic.hpp"
#include "bsq/lindstedt.hpp"
#include "bsq/models.hpp"
#include "bsq/newton.hpp"

namespace bsq::io {

using fourier::TorusMap;

// {l, d, k_theta_max, k_x_max, parity, entries:[{k, j, re, im}]}; doubles use 17 significant
// digits so binary64 values round-trip exactly. Only nonzero (k, j) columns are listed.
std::string torus_to_json(const TorusMap& a, int indent = -1);
TorusMap torus_from_json(const std::string& text);

std::string spectrum_json(const models::SpectrumReport& r);
std::string series_json(const lindstedt::LindstedtSeries& s);
std::string splitting_json(const hyperbolic::SplittingData& sp);
std::string twist_json(const center::CenterFrame& f, double exactness_defect);
std::string ledger_json(const newton::Ledger& l);

struct RunMeta {
  std::string model;
  double mu = 0;
  double epsilon = 0;
  int seed_order = 0;
  std::string K_final_ref;
};
std::string run_json(const RunMeta& meta, const newton::RunReport& r);

// Newton state for --resume: K, omega, step index, residual history and step reports.
std::string state_to_json(const newton::NewtonState& st);
newton::NewtonState state_from_json(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace bsq::io
