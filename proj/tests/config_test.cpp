#include "capflow/config.hpp"

#include <doctest.h>

#include <sstream>

using namespace capflow;

namespace {

RunConfig from(const std::string& text, const std::string& base = "/cfg") {
  std::istringstream in(text);
  return RunConfig::parse(in, base);
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("values, comments and defaults") {
    const auto c = from("# run\nnorm.type = ellipsoid  # trailing\nnorm.axes = [4, 1, 1]\nflow.t_end = 2.5\n"
                        "flow.polar_filter = false\ngrid.n_beta = 32\noutput.dir = \"runs/a\"\n");
    CHECK(c.str("norm.type", "") == "ellipsoid");
    CHECK(c.array("norm.axes", {}) == std::vector<double>{4, 1, 1});
    CHECK(c.num("flow.t_end", 0) == 2.5);
    CHECK(c.num("flow.omega0", -0.5) == -0.5);
    CHECK_FALSE(c.flag("flow.polar_filter", true));
    CHECK(c.integer("grid.n_beta", 0) == 32);
    CHECK(c.path("output.dir", "out") == std::filesystem::path("/cfg/runs/a"));
    CHECK(c.path("output.trace", "/abs/t.csv") == std::filesystem::path("/abs/t.csv"));
  }

  TEST_CASE("malformed configs are rejected") {
    CHECK_THROWS_AS(from("flow.omega = 1"), ConfigError);
    CHECK_THROWS_AS(from("flow.omega0 = 1\nflow.omega0 = 2"), ConfigError);
    CHECK_THROWS_AS(from("flow.omega0"), ConfigError);
    CHECK_THROWS_AS(from("flow.omega0 = abc").num("flow.omega0", 0), ConfigError);
    CHECK_THROWS_AS(from("grid.n_beta = 3.5").integer("grid.n_beta", 0), ConfigError);
    CHECK_THROWS_AS(from("flow.polar_filter = yes").flag("flow.polar_filter", true), ConfigError);
    CHECK_THROWS_AS(from("norm.axes = 1, 2").array("norm.axes", {}), ConfigError);
    CHECK_THROWS_AS(RunConfig::load("/nonexistent/capflow.cfg"), ConfigError);
  }

  TEST_CASE("norm construction") {
    CHECK(make_norm<3>(from(""))->name() == "sphere");
    CHECK(make_norm<3>(from("norm.type = quartic_a2"))->name() == "quartic_a2");
    CHECK(make_norm<3>(from("norm.type = quartic_a2_prime"))->name() == "quartic_a2_prime");
    const auto a3 = make_norm<3>(from("norm.type = quartic_a3\nnorm.z0 = 0.3"));
    CHECK(a3->f0(Vec<3>(0, 0, 1)) > 0);
    const auto e = make_norm<3>(from("norm.type = expr\nnorm.expr = sqrt(x^2 + y^2 + z^2)"));
    CHECK(e->f0(Vec<3>(3, 4, 0)) == doctest::Approx(5.0));
    const auto e4 = make_norm<4>(from("norm.type = ellipsoid\nnorm.axes = [1, 1, 1, 4]"));
    CHECK(e4->f0(Vec<4>(0, 0, 0, 2)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(make_norm<3>(from("norm.type = expr")), ConfigError);
    CHECK_THROWS_AS(make_norm<3>(from("norm.type = expr\nnorm.expr = x^2+*y")), ConfigError);
    CHECK_THROWS_AS(make_norm<3>(from("norm.type = ellipsoid\nnorm.axes = [1, 2]")), ConfigError);
    CHECK_THROWS_AS(make_norm<3>(from("norm.type = ellipsoid\nnorm.axes = [1, -2, 1]")), ConfigError);
    CHECK_THROWS_AS(make_norm<4>(from("norm.type = quartic_a2")), ConfigError);
    CHECK_THROWS_AS(make_norm<3>(from("norm.type = cube")), ConfigError);
  }

  TEST_CASE("flow settings") {
    const auto f = make_flow_config(from("flow.integrator = euler\nflow.cfl_sigma = 0.3\nflow.dt = 0.01\n"
                                         "flow.snapshot_every = 5\nflow.volume_correction = false"));
    CHECK(f.integrator == Integrator::Euler);
    CHECK(f.cfl_sigma == 0.3);
    CHECK(f.dt_override == 0.01);
    CHECK(f.snapshot_every == 5);
    CHECK_FALSE(f.volume_correction);
    CHECK_THROWS_AS(make_flow_config(from("flow.cfl_sigma = 1.2")), ConfigError);
    CHECK_THROWS_AS(make_flow_config(from("flow.integrator = rk4")), ConfigError);
    CHECK_THROWS_AS(make_flow_config(from("flow.snapshot_every = 0")), ConfigError);
  }
}
