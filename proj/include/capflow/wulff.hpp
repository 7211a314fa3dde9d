#pragma once

#include "norm.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace capflow {

struct AdmissibilityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <int D>
Vec<D> unit_e(int i) {
  Vec<D> v = Vec<D>::Zero();
  v[i] = 1.0;
  return v;
}

// (-F(E), F(-E)) with E the last basis vector.
template <int D>
std::pair<double, double> admissible_interval(const Norm<D>& norm) {
  const Vec<D> E = unit_e<D>(D - 1);
  return {-support(norm, E).value, support(norm, Vec<D>(-E)).value};
}

template <int D>
struct AnchorVector {
  Vec<D> e_f;
  double omega0 = 0.0;
};

template <int D>
AnchorVector<D> anchor_vector(const Norm<D>& norm, double omega0) {
  const auto [lo, hi] = admissible_interval(norm);
  if (!(omega0 > lo && omega0 < hi)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "omega0 outside (-F(E_%d), F(-E_%d)) = (%.6g, %.6g)", D, D, lo, hi);
    throw AdmissibilityError(buf);
  }
  const Vec<D> E = unit_e<D>(D - 1);
  AnchorVector<D> a;
  a.omega0 = omega0;
  if (omega0 < 0.0) {
    const auto s = support(norm, E);
    a.e_f = s.maximizer / s.value;
  } else if (omega0 > 0.0) {
    const auto s = support(norm, Vec<D>(-E));
    a.e_f = -s.maximizer / s.value;
  } else {
    a.e_f = E;
  }
  return a;
}

// Smallest positive root of F0(rho*u - c) = r along a ray starting inside.
template <int D>
double ray_root(const Norm<D>& norm, const Vec<D>& c, const Vec<D>& u, double r, double tol = 1e-12) {
  auto h = [&](double rho) { return norm.f0(rho * u - c) - r; };
  if (!(h(0.0) < 0.0)) throw std::domain_error("ray-miss: origin not interior");
  double lo = 0.0, hi = r;
  while (h(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw std::domain_error("ray-miss: unbounded ray");
  }
  // Newton from the outside converges monotonically for the convex h; bisection guards.
  double rho = hi;
  for (int it = 0; it < 200; ++it) {
    const Jet<D> j = norm.jet(rho * u - c, 1);
    const double v = j.value - r;
    if (v > 0) hi = rho;
    else lo = rho;
    const double dv = j.grad.dot(u);
    double next = dv > 0 ? rho - v / dv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - rho) <= tol * std::max(1.0, rho) || hi - lo <= tol * std::max(1.0, rho)) return next;
    rho = next;
  }
  return rho;
}

template <int D>
class CapillaryWulffShape {
 public:
  CapillaryWulffShape(NormPtr<D> norm, double r, double omega0)
      : norm_(std::move(norm)), r_(r), anchor_(anchor_vector(*norm_, omega0)) {
    if (!(r > 0)) throw std::invalid_argument("radius must be positive");
  }
  CapillaryWulffShape(NormPtr<D> norm, double r, const AnchorVector<D>& anchor)
      : norm_(std::move(norm)), r_(r), anchor_(anchor) {}

  double radius() const { return r_; }
  double omega0() const { return anchor_.omega0; }
  const AnchorVector<D>& anchor() const { return anchor_; }
  const Norm<D>& norm() const { return *norm_; }
  const NormPtr<D>& norm_ptr() const { return norm_; }
  Vec<D> center() const { return r_ * anchor_.omega0 * anchor_.e_f; }

  double radial_function(const Vec<D>& direction) const {
    return ray_root(*norm_, center(), direction, r_);
  }

  // 1 + w0 G(nu_F)(nu_F, E^F) - u_hat / r at the point rho(direction)*direction.
  double static_residual(const Vec<D>& direction) const {
    const Vec<D> X = radial_function(direction) * direction;
    const Jet<D> j = norm_->jet(X - center(), 1);
    const Vec<D> nu = j.grad.normalized();
    const double F = support(*norm_, nu).value;
    const double uhat = X.dot(nu) / F;
    return 1.0 + omega0() * nu.dot(anchor_.e_f) / F - uhat / r_;
  }

 private:
  NormPtr<D> norm_;
  double r_;
  AnchorVector<D> anchor_;
};

// Wulff shape translated by w0 E^F, with F~(x) = F(x) + w0 <E^F, x>.
template <int D>
class TranslatedNorm {
 public:
  TranslatedNorm(NormPtr<D> base, const AnchorVector<D>& anchor)
      : base_(std::move(base)), anchor_(anchor),
        gauge_(std::make_shared<TranslatedGauge<D>>(base_, anchor.omega0 * anchor.e_f)) {}
  TranslatedNorm(NormPtr<D> base, double omega0) : TranslatedNorm(base, anchor_vector(*base, omega0)) {}

  const Norm<D>& base() const { return *base_; }
  const NormPtr<D>& base_ptr() const { return base_; }
  const AnchorVector<D>& anchor() const { return anchor_; }
  double omega0() const { return anchor_.omega0; }
  Vec<D> eta() const { return anchor_.omega0 * anchor_.e_f; }
  // F~^0 as a norm object (implicit-equation path).
  const std::shared_ptr<const TranslatedGauge<D>>& gauge() const { return gauge_; }

  double support_value(const Vec<D>& x) const {
    return support(*base_, x).value + anchor_.omega0 * anchor_.e_f.dot(x);
  }
  double origin_margin() const { return 1.0 - base_->f0(-eta()); }

 private:
  NormPtr<D> base_;
  AnchorVector<D> anchor_;
  std::shared_ptr<const TranslatedGauge<D>> gauge_;
};

struct TranslatedGQ {
  double G = 0.0;
  double Q = 0.0;
};

// Transfer formulas for G~, Q~ at z + eta from data of the base norm at z in W.
template <int D>
TranslatedGQ translated_metric_Q(const TranslatedNorm<D>& tn, const Vec<D>& z, const Vec<D>& X,
                                 const Vec<D>& Y, const Vec<D>& Z) {
  const Jet<D> j = tn.base().jet(z, 3);
  const Mat<D> G = half_square_hessian(j);
  const auto Q = half_square_third(j);
  const Vec<D> eta = tn.eta();
  const double s = 1.0 + z.dot(G * eta);
  if (!(s > 0.0)) throw std::domain_error("1 + G(z)(z, eta) must be positive");
  TranslatedGQ r;
  r.G = X.dot(G * Y) / s;
  r.Q = contract3<D>(Q, X, Y, Z) / s -
        (Z.dot(G * Y) * X.dot(G * eta) + X.dot(G * Y) * Z.dot(G * eta) + X.dot(G * Z) * Y.dot(G * eta)) / (s * s);
  return r;
}

// G~ and Q~ at z~ by differentiating F~^0 directly.
template <int D>
TranslatedGQ translated_metric_Q_direct(const TranslatedNorm<D>& tn, const Vec<D>& z_tilde, const Vec<D>& X,
                                        const Vec<D>& Y, const Vec<D>& Z) {
  const Jet<D> j = tn.gauge()->jet(z_tilde, 3);
  TranslatedGQ r;
  r.G = X.dot(half_square_hessian(j) * Y);
  r.Q = contract3<D>(half_square_third(j), X, Y, Z);
  return r;
}

// Gauge of the boundary slice W~ ∩ {x_D = 0} as a norm on R^{D-1}.
template <int D>
std::shared_ptr<const RestrictedGauge<D>> slice_gauge(const TranslatedNorm<D>& tn) {
  return std::make_shared<RestrictedGauge<D>>(tn.gauge());
}

// Support function of the slice: max <u, y> over the slice body.
template <int D>
double slice_support(const TranslatedNorm<D>& tn, const Vec<D - 1>& u) {
  const RestrictedGauge<D> g(tn.gauge());
  return support(g, u).value;
}

// d = 3 angle sweep over the slice curve with golden-section refinement.
inline double slice_support_sweep(const TranslatedNorm<3>& tn, const Vec<2>& u, int samples = 512) {
  const Vec<3> c = -tn.eta();  // slice of W at x_3 = -w0, centred on -w0 E^F
  auto value = [&](double a) {
    const Vec<3> dir(std::cos(a), std::sin(a), 0.0);
    const double s = ray_root(tn.base(), Vec<3>(-c), dir, 1.0);
    const Vec<3> zt = c + s * dir + tn.eta();
    return u[0] * zt[0] + u[1] * zt[1];
  };
  int best = 0;
  double bv = -1e300;
  const double da = 2 * M_PI / samples;
  for (int i = 0; i < samples; ++i) {
    const double v = value(i * da);
    if (v > bv) {
      bv = v;
      best = i;
    }
  }
  double a = (best - 1) * da, b = (best + 1) * da;
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = value(x1), f2 = value(x2);
  for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = value(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = value(x1);
    }
  }
  return std::max({bv, f1, f2});
}

// Boundary identity: bar F(bar nu) = (F(nu) + w0 <E^F, nu>) / <nu, bar nu>.
template <int D>
double slice_support_identity(const TranslatedNorm<D>& tn, const Vec<D>& nu, const Vec<D>& nu_bar) {
  return tn.support_value(nu) / nu.dot(nu_bar);
}

}  // namespace capflow
