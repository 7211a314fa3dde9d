#pragma once

#include "wulff.hpp"

#include <cmath>
#include <vector>

namespace capflow {

template <int D>
struct SliceFrame {
  Vec<D> z;        // point of W on {x_D = -w0}
  Vec<D> nu;       // outward unit normal of W at z
  Vec<D> mu;       // outward co-normal of the slice, <mu, E> < 0
  std::vector<Vec<D>> tangents;  // orthonormal basis of T_z(slice)
  Vec<D> af_mu;    // A_F(nu) mu
  double F_nu = 0; // F(nu) = <z, nu>
  Mat<D> G;        // G(z)
  std::array<double, D * D * D> Q{};
};

// Slice point along the planar direction u (unit in R^{D-1}) from -w0 E^F.
template <int D>
SliceFrame<D> slice_frame(const Norm<D>& norm, const AnchorVector<D>& anchor, const Vec<D - 1>& u) {
  const Vec<D> c = -anchor.omega0 * anchor.e_f;
  Vec<D> dir;
  dir << u, 0.0;
  SliceFrame<D> f;
  const double s = ray_root(norm, Vec<D>(-c), dir, 1.0);
  f.z = c + s * dir;
  const Jet<D> j = norm.jet(f.z, 3);
  f.nu = j.grad.normalized();
  f.G = half_square_hessian(j);
  f.Q = half_square_third(j);
  const Vec<D> E = unit_e<D>(D - 1);
  const Vec<D> Ep = E - E.dot(f.nu) * f.nu;
  f.mu = -Ep.normalized();
  f.F_nu = f.z.dot(f.nu);
  Mat<D> H = f.G.inverse() - f.z * f.z.transpose();
  f.af_mu = H * f.mu / f.F_nu;
  // tangents: orthonormal complement of (nu', 0) inside {x_D = 0}
  Vec<D - 1> nup = f.nu.template head<D - 1>();
  if constexpr (D - 1 == 2) {
    Vec<D> t;
    t << -nup[1], nup[0], 0.0;
    f.tangents.push_back(t.normalized());
  } else {
    const auto B = tangent_basis<D - 1>(nup.normalized());
    for (int m = 0; m < D - 2; ++m) {
      Vec<D> t;
      t << B.col(m), 0.0;
      f.tangents.push_back(t);
    }
  }
  return f;
}

template <int D>
SliceFrame<D> slice_frame(const Norm<D>& norm, const AnchorVector<D>& anchor, double angle) {
  static_assert(D == 3, "angle parametrization is for d = 3");
  return slice_frame<D>(norm, anchor, Vec<2>(std::cos(angle), std::sin(angle)));
}

// RHS of the condition minus w0 for the tangent Y.
template <int D>
double condition_margin(double omega0, const SliceFrame<D>& f, const Vec<D>& Y) {
  const Vec<D> E = unit_e<D>(D - 1);
  const double rhs = contract3<D>(f.Q, Y, Y, f.af_mu) * E.dot(f.mu) * f.F_nu / Y.dot(f.G * Y);
  return rhs - omega0;
}

// Same quantity with the co-normal orientation reversed.
template <int D>
double condition_margin_flipped(double omega0, const SliceFrame<D>& f, const Vec<D>& Y) {
  const Vec<D> E = unit_e<D>(D - 1);
  const double rhs = contract3<D>(f.Q, Y, Y, Vec<D>(-f.af_mu)) * E.dot(Vec<D>(-f.mu)) * f.F_nu / Y.dot(f.G * Y);
  return rhs - omega0;
}

// -Q~(z~)(Y, Y, A_F(nu) mu), by direct differentiation of F~^0.
template <int D>
double condition_margin_translated(const TranslatedNorm<D>& tn, const SliceFrame<D>& f, const Vec<D>& Y) {
  const Vec<D> zt = f.z + tn.eta();
  return -translated_metric_Q_direct(tn, zt, Y, Y, f.af_mu).Q;
}

template <int D>
struct ConditionSample {
  Vec<D> z;
  Vec<D> Y;
  double margin = 0;
  double margin_flipped = 0;
  double margin_translated = 0;
  bool degenerate = false;
};

template <int D>
struct ConditionReport {
  double omega0 = 0;
  std::vector<ConditionSample<D>> samples;
  double min_margin = 0;
  double min_margin_translated = 0;
  bool satisfied = false;
  bool both_forms_agree = true;
  int degenerate_count = 0;
};

inline constexpr double kConditionTol = 1e-6;

template <int D>
std::vector<Vec<D - 1>> slice_directions(int count) {
  if constexpr (D == 3) {
    std::vector<Vec<2>> out;
    for (int i = 0; i < count; ++i) {
      const double a = 2 * M_PI * i / count;
      out.emplace_back(std::cos(a), std::sin(a));
    }
    return out;
  } else {
    return sphere_samples<D - 1>(count);
  }
}

template <int D>
ConditionReport<D> check_condition(const NormPtr<D>& norm, double omega0, int slice_samples = 512,
                                   double tol = kConditionTol, bool translated = true) {
  ConditionReport<D> rep;
  rep.omega0 = omega0;
  const AnchorVector<D> anchor = anchor_vector(*norm, omega0);
  std::unique_ptr<TranslatedNorm<D>> tn;
  if (translated) tn = std::make_unique<TranslatedNorm<D>>(norm, anchor);
  rep.min_margin = 1e300;
  rep.min_margin_translated = 1e300;
  const double zero_band = 1e-9;
  for (const auto& u : slice_directions<D>(slice_samples)) {
    const SliceFrame<D> f = slice_frame<D>(*norm, anchor, u);
    std::vector<Vec<D>> ys;
    if constexpr (D == 3) {
      ys.push_back(f.tangents[0]);
    } else {
      for (int m = 0; m < 32; ++m) {
        const double a = M_PI * m / 32;
        ys.push_back(std::cos(a) * f.tangents[0] + std::sin(a) * f.tangents[1]);
      }
    }
    ConditionSample<D> worst;
    worst.margin = 1e300;
    for (const auto& Y : ys) {
      ConditionSample<D> s;
      s.z = f.z;
      s.Y = Y;
      s.margin = condition_margin(omega0, f, Y);
      s.margin_flipped = condition_margin_flipped(omega0, f, Y);
      s.margin_translated = tn ? condition_margin_translated(*tn, f, Y) : s.margin;
      s.degenerate = std::sqrt(f.af_mu.dot(f.G * f.af_mu)) < 1e-8;
      if (tn) {
        const bool a = s.margin >= 0.0 || std::abs(s.margin) < zero_band;
        const bool b = s.margin_translated >= 0.0 || std::abs(s.margin_translated) < zero_band;
        const bool a2 = s.margin < 0.0 || std::abs(s.margin) < zero_band;
        const bool b2 = s.margin_translated < 0.0 || std::abs(s.margin_translated) < zero_band;
        if (!((a && b) || (a2 && b2))) rep.both_forms_agree = false;
      }
      rep.min_margin_translated = std::min(rep.min_margin_translated, s.margin_translated);
      if (s.margin < worst.margin) worst = s;
    }
    if (worst.degenerate) ++rep.degenerate_count;
    rep.min_margin = std::min(rep.min_margin, worst.margin);
    rep.samples.push_back(worst);
  }
  rep.satisfied = rep.min_margin >= -tol;
  return rep;
}

struct ScanResult {
  double value = 0;
  enum class Status { SignChange, WholeBracketAdmissible, WholeBracketViolated } status = Status::SignChange;
};

template <int D>
ScanResult scan_max_omega(const NormPtr<D>& norm, double lo, double hi, int slice_samples = 512,
                          double resolution = 5e-4) {
  auto ok = [&](double w) { return check_condition<D>(norm, w, slice_samples, kConditionTol, false).satisfied; };
  ScanResult r;
  if (ok(hi)) {
    r.value = hi;
    r.status = ScanResult::Status::WholeBracketAdmissible;
    return r;
  }
  if (!ok(lo)) {
    r.value = lo;
    r.status = ScanResult::Status::WholeBracketViolated;
    return r;
  }
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid)) lo = mid;
    else hi = mid;
  }
  r.value = 0.5 * (lo + hi);
  return r;
}

}  // namespace capflow
