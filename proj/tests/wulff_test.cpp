#include "capflow/wulff.hpp"

#include <doctest.h>

#include <random>

using namespace capflow;

namespace {

double bisect(const std::function<double(double)>& h, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (h(m) < 0 ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

// Slice of W + w0 E^F with {x_3 = 0}, sampled densely; max <u, q> over the curve.
double sampled_slice_support(const Norm<3>& n, const Vec<3>& eta, const Vec<2>& u, int count) {
  double best = -1e300;
  for (int k = 0; k < count; ++k) {
    const double a = 2 * M_PI * k / count;
    const Vec<3> d(std::cos(a), std::sin(a), 0);
    const double t = bisect([&](double s) { return n.f0(s * d - eta) - 1.0; }, 0.0, 10.0);
    best = std::max(best, t * (u[0] * d[0] + u[1] * d[1]));
  }
  return best;
}

std::vector<Vec<3>> upper_directions(int count) {
  std::vector<Vec<3>> out;
  for (const auto& x : sphere_samples<3>(2 * count))
    if (x[2] >= 0) out.push_back(x);
  return out;
}

}  // namespace

TEST_SUITE("wulff") {
  TEST_CASE("anchor vectors") {
    CHECK((anchor_vector(SphereNorm<3>(), -0.5).e_f - Vec<3>(0, 0, 1)).norm() < 1e-14);
    CHECK((anchor_vector(QuarticNorm(1.0), -0.3).e_f - Vec<3>(0, 0, 1)).norm() < 1e-10);
    CHECK((anchor_vector(EllipsoidNorm<3>(Vec<3>(4, 1, 1)), -0.2).e_f - Vec<3>(0, 0, 1)).norm() < 1e-10);
    CHECK((anchor_vector(QuarticNorm(1.0), 0.0).e_f - Vec<3>(0, 0, 1)).norm() == 0.0);
  }

  TEST_CASE("inadmissible omega0 is rejected") {
    try {
      anchor_vector(SphereNorm<3>(), -2.0);
      FAIL("expected rejection");
    } catch (const AdmissibilityError& e) {
      CHECK(std::string(e.what()) == "omega0 outside (-F(E_3), F(-E_3)) = (-1, 1)");
    }
    CHECK_THROWS_AS(anchor_vector(SphereNorm<3>(), 1.0), AdmissibilityError);
  }

  TEST_CASE("radial functions of caps") {
    const auto sp = std::make_shared<SphereNorm<3>>();
    const CapillaryWulffShape<3> hemi(sp, 1.0, 0.0);
    for (const auto& d : upper_directions(50)) CHECK(hemi.radial_function(d) == doctest::Approx(1.0).epsilon(1e-12));
    const CapillaryWulffShape<3> cap(sp, 1.0, -0.5);
    CHECK(cap.radial_function(Vec<3>(0, 0, 1)) == doctest::Approx(0.5).epsilon(1e-12));
    const auto a2 = std::make_shared<QuarticNorm>(1.0);
    const CapillaryWulffShape<3> w(a2, 1.0, -0.3);
    const double oracle = bisect([&](double r) { return a2->f0(Vec<3>(0, 0, r) - w.center()) - 1.0; }, 0.0, 3.0);
    CHECK(std::abs(w.radial_function(Vec<3>(0, 0, 1)) - oracle) < 1e-10);
  }

  TEST_CASE("static residual and scaling") {
    const auto a2 = std::make_shared<QuarticNorm>(1.0);
    const CapillaryWulffShape<3> w1(a2, 1.0, -0.3), w(a2, 1.5, -0.3);
    for (const auto& d : upper_directions(1000)) {
      CHECK(std::abs(w.static_residual(d)) < 1e-8);
      CHECK(std::abs(w.radial_function(d) - 1.5 * w1.radial_function(d)) < 1e-10);
    }
  }

  TEST_CASE("translation by zero is the identity") {
    const auto a2 = std::make_shared<QuarticNorm>(1.0);
    const TranslatedNorm<3> tn(a2, 0.0);
    for (const auto& x : sphere_samples<3>(20)) {
      const Vec<3> z = x / a2->f0(x);
      const auto j = a2->jet(z, 3);
      const Mat<3> G = half_square_hessian(j);
      const auto Q = half_square_third(j);
      const Vec<3> X(1, 0.2, -0.1), Y(0, 1, 0.3), Z(0.5, -0.4, 1);
      const auto t = translated_metric_Q(tn, z, X, Y, Z);
      CHECK(t.G == doctest::Approx(X.dot(G * Y)).epsilon(1e-14));
      CHECK(t.Q == doctest::Approx(contract3<3>(Q, X, Y, Z)).epsilon(1e-13));
    }
  }

  TEST_CASE("transfer formulas agree with direct jets") {
    const auto a2 = std::make_shared<QuarticNorm>(1.0);
    for (double w0 : {-0.3, 0.4}) {
      const TranslatedNorm<3> tn(a2, w0);
      std::mt19937_64 rng(11);
      std::normal_distribution<double> N;
      for (const auto& x : sphere_samples<3>(100)) {
        const Vec<3> z = x / a2->f0(x);
        // The transfer identities hold on tangent vectors of the shape.
        const Vec<3> g = a2->jet(z, 1).grad;
        auto tangent = [&] {
          const Vec<3> v(N(rng), N(rng), N(rng));
          return Vec<3>(v - g * (g.dot(v) / g.squaredNorm()));
        };
        const Vec<3> X = tangent(), Y = tangent(), Z = tangent();
        const auto a = translated_metric_Q(tn, z, X, Y, Z);
        const auto b = translated_metric_Q_direct(tn, Vec<3>(z + tn.eta()), X, Y, Z);
        CHECK(std::abs(a.G - b.G) < 1e-6 * std::max(1.0, std::abs(b.G)));
        CHECK(std::abs(a.Q - b.Q) < 1e-6 * std::max(1.0, std::abs(b.Q)));
      }
    }
  }

  TEST_CASE("slice support") {
    const auto sp = std::make_shared<SphereNorm<3>>();
    const TranslatedNorm<3> cap(sp, -std::cos(M_PI / 3));
    const TranslatedNorm<3> flat(sp, 0.0);
    for (int k = 0; k < 8; ++k) {
      const Vec<2> u(std::cos(0.7 * k), std::sin(0.7 * k));
      CHECK(slice_support(cap, u) == doctest::Approx(std::sin(M_PI / 3)).epsilon(1e-10));
      CHECK(slice_support(flat, u) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto a2 = std::make_shared<QuarticNorm>(1.0);
    const TranslatedNorm<3> tn(a2, -0.3);
    for (const Vec<2>& u : {Vec<2>(1, 0), Vec<2>(std::sqrt(0.5), std::sqrt(0.5))}) {
      const double oracle = sampled_slice_support(*a2, tn.eta(), u, 20000);
      CHECK(std::abs(slice_support(tn, u) - oracle) < 1e-8);
      CHECK(std::abs(slice_support_sweep(tn, u) - oracle) < 1e-8);
    }
  }
}
