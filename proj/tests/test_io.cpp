#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bsq/config.hpp"
#include "bsq/error.hpp"
#include "bsq/serialize.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace bsq;
using cd = std::complex<double>;

namespace {

std::string config_error(const std::string& text) {
  try {
    config::load(text, "t.ini");
  } catch (const bsq::Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config errors name the source line") {
  CHECK(config_error("[model]\nnme = scalar\n").find("t.ini:2: unknown key 'model.nme'") != std::string::npos);
  CHECK(config_error("[model]\nmu = 0.1\n\nmu = 0.2\n").find("t.ini:4: duplicate key") != std::string::npos);
  CHECK(config_error("[torus]\nk_x = many\n").find("t.ini:2: expected an integer") != std::string::npos);
  CHECK(config_error("[newton]\nhalving = 0.9\n").find("t.ini:2: newton.halving") != std::string::npos);
  CHECK(config_error("mu = 1\n").find("outside any section") != std::string::npos);
  CHECK(config_error("[model\n").find("unterminated") != std::string::npos);
}

TEST_CASE("config defaults, comments and printing round trip") {
  auto c = config::load("# run\n[model]\nname = system ; inline\n[lindstedt]\namplitudes = 1.5\nepsilon = 2e-2\n", "a.ini");
  CHECK(c.model == "system");
  CHECK(c.amplitudes == std::vector<double>{1.5});
  CHECK(c.epsilon == 2e-2);
  CHECK(c.k_theta == 16);
  auto d = config::load(config::print(c), "b.ini");
  CHECK(config::print(d) == config::print(c));
  CHECK(config::resolved_mu(d) == doctest::Approx(1 / (8 * std::numbers::pi * std::numbers::pi)));
}

TEST_CASE("model-dependent validation") {
  auto c = config::load("[torus]\nk_x = 3\n", "v.ini");
  CHECK_THROWS_AS(config::validate(c), bsq::Error);
  auto d = config::load("[lindstedt]\namplitudes = 1, 2\n", "v.ini");
  CHECK_THROWS_AS(config::validate(d), bsq::Error);
  CHECK_NOTHROW(config::validate(config::load("", "v.ini")));
}

TEST_CASE("torus json round trip is exact") {
  fourier::TorusMap a(1, 2, 3, 4);
  a.set1(0, 1, 1, cd(0.1, 1.0 / 3));
  a.set1(0, -1, -1, cd(0.1, -1.0 / 3));
  a.set1(1, 2, -3, cd(std::numbers::pi * 1e-17, 0));
  a.set1(1, -2, 3, cd(std::numbers::pi * 1e-17, 0));
  auto txt = io::torus_to_json(a);
  auto b = io::torus_from_json(txt);
  CHECK(b.kt() == 3);
  CHECK(b.kx() == 4);
  CHECK(b.data() == a.data());
  auto j = nlohmann::json::parse(txt);
  CHECK(j["entries"].size() <= 8);
}

TEST_CASE("malformed torus json is an io error") {
  bool thrown = false;
  try {
    io::torus_from_json("{\"l\": 1}");
  } catch (const bsq::Error&) {
    thrown = true;
  } catch (const std::exception&) {
    thrown = true;
  }
  CHECK(thrown);
}

TEST_CASE("newton state round trip") {
  newton::NewtonState st;
  st.m = 3;
  st.kx = 4;
  st.K = fourier::TorusMap(1, 2, 2, 4);
  st.K.set1(0, 1, 1, cd(0.25, 0));
  st.K.set1(0, -1, -1, cd(0.25, 0));
  st.omega = {0.7071067811865476};
  st.residuals = {1e-5, 2e-11, std::numeric_limits<double>::infinity()};
  st.reports.resize(1);
  st.reports[0].m = 1;
  st.reports[0].resid_Y = 1e-5;
  auto txt = io::state_to_json(st);
  // non-finite values are written as null
  CHECK(txt.find("inf") == std::string::npos);
  auto back = io::state_from_json(txt);
  CHECK(back.m == 3);
  CHECK(back.omega == st.omega);
  CHECK(back.K.data() == st.K.data());
  CHECK(back.residuals.at(1) == 2e-11);
  CHECK(back.reports.size() == 1);
}
