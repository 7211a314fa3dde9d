#include "capflow/flow.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace capflow;

namespace {

using Grid = HalfSphereGrid<2>;

std::shared_ptr<const Grid> grid(int nb) { return std::make_shared<Grid>(nb, 2 * nb); }

struct Cap {
  std::shared_ptr<GeometryEngine<2>> eng;
  GraphSurface<2> s;
  GeometryBundle<2> B;
};

Cap wulff_cap(const NormPtr<3>& n, double w0, int nb, double r = 1.0) {
  const auto g = grid(nb);
  const CapillaryWulffShape<3> shape(n, r, w0);
  auto eng = std::make_shared<GeometryEngine<2>>(g, n, shape.anchor());
  auto s = graph_of_shape<2>(g, shape);
  eng->enforce_boundary(s);
  auto B = eng->evaluate(s);
  return {eng, s, B};
}

NormPtr<3> sphere() { return std::make_shared<SphereNorm<3>>(); }
NormPtr<3> a2() { return std::make_shared<QuarticNorm>(1.0); }

}  // namespace

TEST_SUITE("surface") {
  TEST_CASE("unit hemisphere is static") {
    auto c = wulff_cap(sphere(), 0.0, 32);
    for (std::size_t i = 0; i < c.B.f.size(); ++i) {
      CHECK(std::abs(c.B.uhat[i] - 1) < 1e-10);
      CHECK(std::abs(c.B.H[i][1] - 1) < 1e-6);
      CHECK(std::abs(c.B.kappa[i][0] - 1) < 1e-6);
      CHECK(std::abs(c.B.kappa[i][1] - 1) < 1e-6);
      CHECK(std::abs(c.B.f[i]) < 1e-6);
    }
    CHECK(c.B.max_psi < 1e-10);
  }

  TEST_CASE("capillary caps are static up to truncation error") {
    auto c = wulff_cap(sphere(), -0.5, 64);
    for (std::size_t i = 0; i < c.B.f.size(); ++i)
      CHECK(std::abs(c.B.uhat[i] - (1 - 0.5 * c.B.nu[i][2])) < 5e-3);
    CHECK(sup_abs<2>(c.B.f) <= 5e-3);
    CHECK(c.B.max_psi <= 1e-10);
    auto q64 = wulff_cap(a2(), -0.3, 64), q128 = wulff_cap(a2(), -0.3, 128);
    const double e64 = sup_abs<2>(q64.B.f), e128 = sup_abs<2>(q128.B.f);
    CHECK(e64 <= 5e-3);
    CHECK(e128 <= 1.3e-3);
    CHECK(std::log2(e64 / e128) > 1.7);
    CHECK(q64.B.max_psi <= 1e-8);
  }

  TEST_CASE("curvatures of an off-centre round sphere") {
    // Classical principal curvatures of a sphere of radius R are 1/R wherever it is sampled.
    const double R = 1.3;
    const Vec<3> c(0.15, -0.1, -0.4);
    const auto g = grid(64);
    GraphSurface<2> s(g);
    for (int k = 0; k < g->total(); ++k) {
      const Vec<3>& d = g->frame(k).x;
      const double b = d.dot(c);
      s.phi[k] = std::log(b + std::sqrt(b * b - c.squaredNorm() + R * R));
    }
    GeometryEngine<2> eng(g, sphere(), anchor_vector(SphereNorm<3>(), -0.3));
    const auto B = eng.evaluate(s);
    double err = 0;
    for (std::size_t i = 0; i < B.f.size(); ++i) {
      CHECK(std::abs(B.F[i] - 1) < 1e-12);
      CHECK(std::abs(B.uhat[i] - B.u[i]) < 1e-12);
      err = std::max({err, std::abs(B.kmin[i] - 1 / R), std::abs(B.kmax[i] - 1 / R)});
    }
    CHECK(err < 2e-3);
  }

  TEST_CASE("volumes and capillary areas") {
    auto h = wulff_cap(sphere(), 0.0, 64);
    CHECK(std::abs(enclosed_volume(h.s) - 2 * M_PI / 3) < 1e-4);
    CHECK(std::abs(capillary_area(*h.eng, h.s, h.B) - 2 * M_PI / 3) < 1e-4);
    CHECK(std::abs(quermassintegral_interior(h.B, 1, 0.0) - 2 * M_PI / 3) < 1e-3);
    auto c = wulff_cap(sphere(), -0.5, 64);
    const double ref = 5 * M_PI / 24;
    CHECK(std::abs(enclosed_volume(c.s) - ref) < 1e-3);
    CHECK(std::abs(capillary_area(*c.eng, c.s, c.B) - ref) < 1e-3);
    auto scaled = c.s;
    scale_surface(scaled, 1.7);
    CHECK(std::abs(enclosed_volume(scaled) / enclosed_volume(c.s) - std::pow(1.7, 3)) < 1e-8);
  }

  TEST_CASE("Monte-Carlo volume of the cap") {
    auto c = wulff_cap(sphere(), -0.5, 64);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1, 1);
    long in = 0;
    const long n = 400000;
    for (long i = 0; i < n; ++i) {
      const Vec<3> p(U(rng), U(rng), 0.5 * (U(rng) + 1));
      in += (p - Vec<3>(0, 0, -0.5)).norm() <= 1.0;
    }
    const double mc = 4.0 * in / n;  // box volume 2 * 2 * 1
    CHECK(std::abs(enclosed_volume(c.s) - mc) < 5e-3);
  }

  TEST_CASE("quermassintegrals of unit Wulff caps equal the volume") {
    for (const auto& [n, w0] : std::vector<std::pair<NormPtr<3>, double>>{
             {a2(), -0.3}, {std::make_shared<EllipsoidNorm<3>>(Vec<3>(4, 1, 1)), -0.2}, {sphere(), 0.4}}) {
      auto c = wulff_cap(n, w0, 64);
      const double v0 = enclosed_volume(c.s);
      CHECK(std::abs(capillary_area(*c.eng, c.s, c.B) / v0 - 1) < 2e-3);
      CHECK(std::abs(quermassintegral_interior(c.B, 0, w0) / v0 - 1) < 2e-3);
      CHECK(std::abs(quermassintegral_interior(c.B, 1, w0) / v0 - 1) < 2e-3);
      CHECK(std::abs(quermassintegral_interior(c.B, 2, w0) / v0 - 1) < 2e-3);
      const double vb = quermassintegral_boundary(*c.eng, c.s, c.B, 1);
      CHECK(std::abs(vb / quermassintegral_interior(c.B, 1, w0) - 1) < 5e-3);
    }
  }

  TEST_CASE("quermassintegrals scale with the radius") {
    auto c1 = wulff_cap(a2(), -0.3, 64, 1.0), c2 = wulff_cap(a2(), -0.3, 64, 1.6);
    const double w0 = -0.3;
    CHECK(std::abs(capillary_area(*c2.eng, c2.s, c2.B) / capillary_area(*c1.eng, c1.s, c1.B) - 1.6 * 1.6) < 1e-8);
    CHECK(std::abs(quermassintegral_interior(c2.B, 1, w0) / quermassintegral_interior(c1.B, 1, w0) - 1.6) < 1e-8);
    CHECK(std::abs(quermassintegral_interior(c2.B, 2, w0) / quermassintegral_interior(c1.B, 2, w0) - 1.0) < 1e-8);
  }

  TEST_CASE("Minkowski residuals") {
    auto c = wulff_cap(sphere(), -0.5, 64);
    CHECK(std::abs(minkowski_residual(c.B, 0, -0.5)) <= 1e-3);
    auto h = wulff_cap(sphere(), 0.0, 64);
    CHECK(std::abs(minkowski_residual(h.B, 1, 0.0)) <= 1e-3);
    double prev = 0;
    for (int nb : {32, 64}) {
      const auto g = grid(nb);
      GeometryEngine<2> eng(g, a2(), anchor_vector(QuarticNorm(1.0), -0.3));
      const auto s = perturbed_cap(eng, 1.0, 0.1, 42);
      const auto B = eng.evaluate(s, false);
      const double r = std::abs(minkowski_residual(B, 0, -0.3));
      CHECK(r <= 5e-3);
      if (prev > 0) CHECK(prev / r > 3.0);
      prev = r;
    }
  }

  TEST_CASE("boundary enforcement") {
    const auto g = grid(32);
    for (double w0 : {0.0, -0.3, 0.5}) {
      GeometryEngine<2> eng(g, a2(), anchor_vector(QuarticNorm(1.0), w0));
      const auto s = perturbed_cap(eng, 1.2, 0.15, 9);
      CHECK(eng.boundary_residual(s) <= 1e-8);
      const auto B = eng.evaluate(s, false);
      CHECK(B.max_psi <= 1e-8);
    }
  }

  TEST_CASE("three-dimensional hypersurfaces") {
    const NormPtr<4> n = std::make_shared<SphereNorm<4>>();
    const auto g = std::make_shared<HalfSphereGrid<3>>(8, 16, 8);
    CHECK(std::abs(g->total_measure() - M_PI * M_PI) < 1e-12);
    const CapillaryWulffShape<4> shape(n, 1.0, -0.4);
    auto s = graph_of_shape<3>(g, shape);
    GeometryEngine<3> eng(g, n, shape.anchor());
    CHECK(eng.enforce_boundary(s).max_psi < 1e-12);
    const auto B = eng.evaluate(s);
    const double v0 = enclosed_volume(s);
    CHECK(sup_abs<3>(B.f) < 2e-2);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(quermassintegral_interior(B, k, -0.4) / v0 - 1) < 1e-2);
  }

  TEST_CASE("OBJ and field output") {
    auto c = wulff_cap(sphere(), -0.5, 16);
    const auto dir = std::filesystem::temp_directory_path() / "capflow_surface_test";
    std::filesystem::create_directories(dir);
    write_obj((dir / "cap.obj").string(), *c.eng, c.s);
    std::ifstream in(dir / "cap.obj");
    int v = 0, f = 0;
    std::string line;
    while (std::getline(in, line)) {
      v += line.rfind("v ", 0) == 0;
      f += line.rfind("f ", 0) == 0;
    }
    CHECK(v == 1 + 16 * 32 + 32);
    CHECK(f == 32 + 16 * 32);
    write_field_csv((dir / "f.csv").string(), c.B, c.B.f, "f");
    CHECK(std::filesystem::file_size(dir / "f.csv") > 0);
  }
}
