#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>

namespace capflow {

template <int D>
using Vec = Eigen::Matrix<double, D, 1>;
template <int D>
using Mat = Eigen::Matrix<double, D, D>;

// Truncated third-order Taylor data of a scalar function at a point.
template <int D>
struct Jet {
  double value = 0.0;
  Vec<D> grad = Vec<D>::Zero();
  Mat<D> hess = Mat<D>::Zero();
  std::array<double, D * D * D> third{};
  int order = 0;

  double& t(int i, int j, int k) { return third[(i * D + j) * D + k]; }
  double t(int i, int j, int k) const { return third[(i * D + j) * D + k]; }

  // Writes one value into every permutation slot of (i,j,k).
  void set_sym(int i, int j, int k, double v) {
    t(i, j, k) = v;
    t(i, k, j) = v;
    t(j, i, k) = v;
    t(j, k, i) = v;
    t(k, i, j) = v;
    t(k, j, i) = v;
  }

  static Jet constant(double c, int order) {
    Jet r;
    r.value = c;
    r.order = order;
    return r;
  }

  static Jet variable(const Vec<D>& x, int idx, int order) {
    Jet r;
    r.value = x[idx];
    r.grad[idx] = 1.0;
    r.order = order;
    return r;
  }
};

template <int D>
Jet<D> operator+(const Jet<D>& a, const Jet<D>& b) {
  Jet<D> r;
  r.order = std::min(a.order, b.order);
  r.value = a.value + b.value;
  r.grad = a.grad + b.grad;
  r.hess = a.hess + b.hess;
  if (r.order >= 3)
    for (int m = 0; m < D * D * D; ++m) r.third[m] = a.third[m] + b.third[m];
  return r;
}

template <int D>
Jet<D> operator*(double c, Jet<D> a) {
  a.value *= c;
  a.grad *= c;
  a.hess *= c;
  for (auto& v : a.third) v *= c;
  return a;
}

template <int D>
Jet<D> operator*(const Jet<D>& f, const Jet<D>& g) {
  Jet<D> r;
  const int ord = std::min(f.order, g.order);
  r.order = ord;
  r.value = f.value * g.value;
  r.grad = f.grad * g.value + g.grad * f.value;
  if (ord >= 2) {
    for (int i = 0; i < D; ++i)
      for (int j = i; j < D; ++j) {
        const double v = f.hess(i, j) * g.value + f.grad[i] * g.grad[j] +
                         f.grad[j] * g.grad[i] + f.value * g.hess(i, j);
        r.hess(i, j) = v;
        r.hess(j, i) = v;
      }
  }
  if (ord >= 3) {
    for (int i = 0; i < D; ++i)
      for (int j = i; j < D; ++j)
        for (int k = j; k < D; ++k) {
          const double v = f.t(i, j, k) * g.value + f.hess(i, j) * g.grad[k] +
                           f.hess(i, k) * g.grad[j] + f.hess(j, k) * g.grad[i] +
                           f.grad[i] * g.hess(j, k) + f.grad[j] * g.hess(i, k) +
                           f.grad[k] * g.hess(i, j) + f.value * g.t(i, j, k);
          r.set_sym(i, j, k, v);
        }
  }
  return r;
}

// Chain rule for a scalar outer function with derivatives d[0..3] at f.value.
template <int D>
Jet<D> compose(const Jet<D>& f, const std::array<double, 4>& d) {
  Jet<D> r;
  r.order = f.order;
  r.value = d[0];
  r.grad = d[1] * f.grad;
  if (f.order >= 2) {
    for (int i = 0; i < D; ++i)
      for (int j = i; j < D; ++j) {
        const double v = d[2] * f.grad[i] * f.grad[j] + d[1] * f.hess(i, j);
        r.hess(i, j) = v;
        r.hess(j, i) = v;
      }
  }
  if (f.order >= 3) {
    for (int i = 0; i < D; ++i)
      for (int j = i; j < D; ++j)
        for (int k = j; k < D; ++k) {
          const double v =
              d[3] * f.grad[i] * f.grad[j] * f.grad[k] +
              d[2] * (f.hess(i, j) * f.grad[k] + f.hess(i, k) * f.grad[j] +
                      f.hess(j, k) * f.grad[i]) +
              d[1] * f.t(i, j, k);
          r.set_sym(i, j, k, v);
        }
  }
  return r;
}

// f^a for f > 0.
template <int D>
Jet<D> pow(const Jet<D>& f, double a) {
  const double u = f.value;
  const double p0 = std::pow(u, a);
  const double p1 = a * p0 / u;
  const double p2 = (a - 1.0) * p1 / u;
  const double p3 = (a - 2.0) * p2 / u;
  return compose(f, {p0, p1, p2, p3});
}

// Derivatives of 1/2 (F^0)^2 from the jet of F^0.
template <int D>
Mat<D> half_square_hessian(const Jet<D>& j) {
  return j.value * j.hess + j.grad * j.grad.transpose();
}

template <int D>
std::array<double, D * D * D> half_square_third(const Jet<D>& j) {
  std::array<double, D * D * D> q{};
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c)
        q[(a * D + b) * D + c] = j.value * j.t(a, b, c) + j.grad[a] * j.hess(b, c) +
                                 j.grad[b] * j.hess(a, c) + j.grad[c] * j.hess(a, b);
  return q;
}

template <int D>
double contract3(const std::array<double, D * D * D>& q, const Vec<D>& x,
                 const Vec<D>& y, const Vec<D>& z) {
  double s = 0.0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c) s += q[(a * D + b) * D + c] * x[a] * y[b] * z[c];
  return s;
}

}  // namespace capflow
