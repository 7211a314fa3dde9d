#pragma once

#include <cmath>

namespace capflow {

// Forward-mode dual number; nest Dual<Dual<...>> for higher derivatives.
template <typename T>
struct Dual {
  T a{};
  T b{};
};

inline double primal(double x) { return x; }
template <typename T>
double primal(const Dual<T>& x) { return primal(x.a); }

template <typename T>
Dual<T> operator+(const Dual<T>& x, const Dual<T>& y) { return {x.a + y.a, x.b + y.b}; }
template <typename T>
Dual<T> operator-(const Dual<T>& x, const Dual<T>& y) { return {x.a - y.a, x.b - y.b}; }
template <typename T>
Dual<T> operator-(const Dual<T>& x) { return {-x.a, -x.b}; }
template <typename T>
Dual<T> operator*(const Dual<T>& x, const Dual<T>& y) { return {x.a * y.a, x.a * y.b + x.b * y.a}; }
template <typename T>
Dual<T> operator*(double c, const Dual<T>& x) { return {c * x.a, c * x.b}; }

template <typename T>
struct ScalarMaker {
  static T make(double c) { return T(c); }
};
template <typename T>
struct ScalarMaker<Dual<T>> {
  static Dual<T> make(double c) { return {ScalarMaker<T>::make(c), ScalarMaker<T>::make(0.0)}; }
};
template <typename T>
T lift(double c) { return ScalarMaker<T>::make(c); }

template <typename T>
Dual<T> operator/(const Dual<T>& x, const Dual<T>& y) {
  const T inv = lift<T>(1.0) / y.a;
  return {x.a * inv, (x.b * y.a - x.a * y.b) * (inv * inv)};
}

using std::exp;
using std::log;
using std::sqrt;

template <typename T>
Dual<T> exp(const Dual<T>& x) {
  const T e = exp(x.a);
  return {e, e * x.b};
}
template <typename T>
Dual<T> log(const Dual<T>& x) { return {log(x.a), x.b / x.a}; }
template <typename T>
Dual<T> sqrt(const Dual<T>& x) {
  const T s = sqrt(x.a);
  return {s, x.b / (lift<T>(2.0) * s)};
}

}  // namespace capflow
