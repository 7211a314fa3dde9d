#include "capflow/condition.hpp"

#include <doctest.h>

using namespace capflow;

TEST_SUITE("condition") {
  TEST_CASE("round slice frame") {
    const SphereNorm<3> sp;
    const auto f = slice_frame<3>(sp, anchor_vector(sp, -0.5), 0.0);
    CHECK((f.z - Vec<3>(std::sqrt(3.0) / 2, 0, 0.5)).norm() < 1e-12);
    CHECK((f.nu - f.z).norm() < 1e-12);
    CHECK(f.mu[2] < 0);
    CHECK(std::abs(f.mu.dot(Vec<3>(f.z).cross(Vec<3>(0, 0, 1)))) < 1e-12);
    CHECK(f.mu.norm() == doctest::Approx(1.0));
    const auto e = slice_frame<3>(sp, anchor_vector(sp, 0.0), 1.3);
    CHECK((e.mu - Vec<3>(0, 0, -1)).norm() < 1e-12);
  }

  TEST_CASE("co-normal image is G-orthogonal to the slice") {
    const QuarticNorm a2(1.0);
    for (double a : {M_PI / 4, 0.3, 2.0}) {
      const auto f = slice_frame<3>(a2, anchor_vector(a2, -0.3), a);
      for (const auto& Y : f.tangents) CHECK(std::abs(f.af_mu.dot(f.G * Y)) < 1e-8);
    }
  }

  TEST_CASE("margins of the reference norms") {
    const NormPtr<3> sp = std::make_shared<SphereNorm<3>>();
    const auto r = check_condition<3>(sp, -0.5);
    CHECK(r.satisfied);
    CHECK(r.min_margin == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.samples.size() == 512);
    const auto a2 = check_condition<3>(std::make_shared<QuarticNorm>(1.0), 0.1);
    CHECK_FALSE(a2.satisfied);
    CHECK(a2.min_margin < 0);
    const auto a3 = check_condition<3>(make_quartic_a3(0.3), 0.3);
    for (const auto& s : a3.samples) {
      CHECK(std::abs(s.margin) < 1e-6);
      CHECK(std::abs(s.margin_translated) < 1e-6);
    }
    CHECK(a3.satisfied);
  }

  TEST_CASE("margin is invariant under rescaling the tangent") {
    const QuarticNorm a2(1.0);
    for (double a : {0.1, 1.1, 2.5}) {
      const auto f = slice_frame<3>(a2, anchor_vector(a2, 0.2), a);
      const Vec<3> Y = f.tangents[0];
      const double m = condition_margin(0.2, f, Y);
      CHECK(std::abs(condition_margin(0.2, f, Vec<3>(-Y)) - m) < 1e-10);
      CHECK(std::abs(condition_margin(0.2, f, Vec<3>(3.7 * Y)) - m) < 1e-10);
    }
  }

  TEST_CASE("original and translated forms agree in sign") {
    CHECK(check_condition<3>(std::make_shared<SphereNorm<3>>(), -0.5).both_forms_agree);
    const auto a2 = check_condition<3>(std::make_shared<QuarticNorm>(1.0), -0.2);
    CHECK(a2.both_forms_agree);
    CHECK(a2.satisfied);
    CHECK(a2.min_margin_translated >= -kConditionTol);
    CHECK(check_condition<3>(std::make_shared<QuarticNorm>(1.0), 0.1, 128).both_forms_agree);
  }

  TEST_CASE("threshold scans") {
    const auto s = scan_max_omega<3>(std::make_shared<SphereNorm<3>>(), -0.9, 0.9, 128);
    CHECK(s.status == ScanResult::Status::SignChange);
    CHECK(std::abs(s.value) <= 1e-3);
    const auto a2 = scan_max_omega<3>(std::make_shared<QuarticNorm>(1.0), -0.9, 0.9, 128);
    CHECK(std::abs(a2.value) <= 1e-3);
    const auto a3 = scan_max_omega<3>(make_quartic_a3(0.3), -0.5, 0.9, 128);
    CHECK(a3.value >= 0.3 - 1e-3);
  }

  TEST_CASE("four-dimensional condition") {
    const auto r = check_condition<4>(std::make_shared<EllipsoidNorm<4>>(Vec<4>(1.5, 1, 1, 1.2)), -0.3, 64);
    CHECK(r.satisfied);
    CHECK(r.degenerate_count == 0);
    CHECK(r.both_forms_agree);
    CHECK_FALSE(check_condition<4>(std::make_shared<SphereNorm<4>>(), 0.2, 64).satisfied);
  }
}
