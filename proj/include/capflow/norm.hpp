#pragma once

#include "expr.hpp"
#include "jet.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace capflow {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A Minkowski norm given through its dual F^0 (the gauge of the Wulff shape).
template <int D>
class Norm {
 public:
  virtual ~Norm() = default;
  virtual Jet<D> jet(const Vec<D>& x, int order) const = 0;
  virtual double f0(const Vec<D>& x) const { return jet(x, 0).value; }
  virtual std::string name() const = 0;
};

template <int D>
using NormPtr = std::shared_ptr<const Norm<D>>;

template <int D>
class SphereNorm final : public Norm<D> {
 public:
  Jet<D> jet(const Vec<D>& x, int order) const override {
    Jet<D> p;
    p.order = order;
    p.value = x.squaredNorm();
    p.grad = 2.0 * x;
    p.hess = 2.0 * Mat<D>::Identity();
    return pow(p, 0.5);
  }
  double f0(const Vec<D>& x) const override { return x.norm(); }
  std::string name() const override { return "sphere"; }
};

// F^0 = sqrt(sum x_i^2 / a_i)
template <int D>
class EllipsoidNorm final : public Norm<D> {
 public:
  explicit EllipsoidNorm(const Vec<D>& axes) : inv_(axes.cwiseInverse()) {
    if ((axes.array() <= 0).any()) throw std::invalid_argument("ellipsoid parameters must be positive");
  }
  Jet<D> jet(const Vec<D>& x, int order) const override {
    Jet<D> p;
    p.order = order;
    p.value = x.dot(inv_.cwiseProduct(x));
    p.grad = 2.0 * inv_.cwiseProduct(x);
    p.hess = 2.0 * inv_.asDiagonal().toDenseMatrix();
    return pow(p, 0.5);
  }
  double f0(const Vec<D>& x) const override { return std::sqrt(x.dot(inv_.cwiseProduct(x))); }
  std::string name() const override { return "ellipsoid"; }

 private:
  Vec<D> inv_;
};

// F^0 = ((s + z^2) s + z^4)^(1/4), s = x^2 + b y^2
class QuarticNorm final : public Norm<3> {
 public:
  explicit QuarticNorm(double b = 1.0) : b_(b) {}
  Jet<3> jet(const Vec<3>& x, int order) const override {
    const int o = std::max(order, 0);
    Jet<3> X = Jet<3>::variable(x, 0, o), Y = Jet<3>::variable(x, 1, o), Z = Jet<3>::variable(x, 2, o);
    Jet<3> s = X * X + b_ * (Y * Y);
    Jet<3> z2 = Z * Z;
    Jet<3> p = (s + z2) * s + z2 * z2;
    return pow(p, 0.25);
  }
  double f0(const Vec<3>& x) const override {
    const double s = x[0] * x[0] + b_ * x[1] * x[1];
    const double z2 = x[2] * x[2];
    return std::pow((s + z2) * s + z2 * z2, 0.25);
  }
  std::string name() const override { return b_ == 1.0 ? "quartic_a2" : "quartic_a2_prime"; }

 private:
  double b_;
};

template <int D>
class ExprNorm final : public Norm<D> {
 public:
  explicit ExprNorm(Expression e) : e_(std::move(e)) {
    if (e_.arity != D) throw std::invalid_argument("expression arity does not match norm dimension");
  }
  Jet<D> jet(const Vec<D>& x, int order) const override { return eval_jet<D>(e_, x, order); }
  double f0(const Vec<D>& x) const override { return eval_value<D>(e_, x); }
  std::string name() const override { return "custom"; }
  const Expression& expression() const { return e_; }

 private:
  Expression e_;
};

// Gauge of the translated body W + eta: solves F^0(x - t eta) = t for t,
// derivatives by implicit differentiation.
template <int D>
class TranslatedGauge final : public Norm<D> {
 public:
  TranslatedGauge(NormPtr<D> base, const Vec<D>& eta, std::string label = "translated")
      : base_(std::move(base)), eta_(eta), label_(std::move(label)) {
    const double c = base_->f0(-eta_);
    if (!(c < 1.0)) throw std::invalid_argument("translated Wulff shape does not contain the origin");
  }

  double solve_value(const Vec<D>& x) const {
    double t = 0.0;
    for (int it = 0; it < 100; ++it) {
      const Jet<D> j = base_->jet(x - t * eta_, 1);
      const double h = j.value - t;
      const double dh = -j.grad.dot(eta_) - 1.0;
      const double nt = t - h / dh;
      if (std::abs(nt - t) <= 1e-15 * std::max(1.0, std::abs(nt))) return nt;
      t = nt;
    }
    return t;
  }

  double f0(const Vec<D>& x) const override { return solve_value(x); }

  Jet<D> jet(const Vec<D>& x, int order) const override {
    Jet<D> r;
    r.order = order;
    r.value = solve_value(x);
    if (order == 0) return r;
    const Jet<D> b = base_->jet(x - r.value * eta_, order);
    const double s = 1.0 + b.grad.dot(eta_);
    r.grad = b.grad / s;
    if (order == 1) return r;
    // y(x) = x - t(x) eta; first derivatives y_{a,i} = delta_ai - eta_a t_i
    const Mat<D> Y1 = Mat<D>::Identity() - eta_ * r.grad.transpose();
    r.hess = Y1.transpose() * b.hess * Y1 / s;
    r.hess = 0.5 * (r.hess + r.hess.transpose()).eval();
    if (order == 2) return r;
    // third: [F_abc y_ai y_bj y_ck + F_ab (y_aik y_bj + y_ai y_bjk + y_aij y_bk)] / s,
    // with y_aij = -eta_a t_ij
    std::array<double, D * D * D> w{};  // contract F_abc with Y1 on all slots
    {
      std::array<double, D * D * D> tmp1{}, tmp2{};
      for (int a = 0; a < D; ++a)
        for (int b2 = 0; b2 < D; ++b2)
          for (int k = 0; k < D; ++k) {
            double acc = 0;
            for (int c = 0; c < D; ++c) acc += b.t(a, b2, c) * Y1(c, k);
            tmp1[(a * D + b2) * D + k] = acc;
          }
      for (int a = 0; a < D; ++a)
        for (int j = 0; j < D; ++j)
          for (int k = 0; k < D; ++k) {
            double acc = 0;
            for (int b2 = 0; b2 < D; ++b2) acc += tmp1[(a * D + b2) * D + k] * Y1(b2, j);
            tmp2[(a * D + j) * D + k] = acc;
          }
      for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j)
          for (int k = 0; k < D; ++k) {
            double acc = 0;
            for (int a = 0; a < D; ++a) acc += tmp2[(a * D + j) * D + k] * Y1(a, i);
            w[(i * D + j) * D + k] = acc;
          }
    }
    // F_ab y_aij y_bk = -(eta^T F_ab Y1)_k t_ij
    const Vec<D> eH = Y1.transpose() * (b.hess * eta_);
    for (int i = 0; i < D; ++i)
      for (int j = i; j < D; ++j)
        for (int k = j; k < D; ++k) {
          const double v = w[(i * D + j) * D + k] -
                           (r.hess(i, k) * eH[j] + r.hess(j, k) * eH[i] + r.hess(i, j) * eH[k]);
          r.set_sym(i, j, k, v / s);
        }
    return r;
  }

  std::string name() const override { return label_; }
  const Vec<D>& eta() const { return eta_; }
  const NormPtr<D>& base() const { return base_; }

 private:
  NormPtr<D> base_;
  Vec<D> eta_;
  std::string label_;
};

// Restriction of a gauge to the hyperplane {x_D = 0}.
template <int D>
class RestrictedGauge final : public Norm<D - 1> {
 public:
  explicit RestrictedGauge(NormPtr<D> base) : base_(std::move(base)) {}
  Jet<D - 1> jet(const Vec<D - 1>& y, int order) const override {
    Vec<D> x;
    x << y, 0.0;
    const Jet<D> j = base_->jet(x, order);
    Jet<D - 1> r;
    r.order = order;
    r.value = j.value;
    r.grad = j.grad.template head<D - 1>();
    r.hess = j.hess.template topLeftCorner<D - 1, D - 1>();
    if (order >= 3)
      for (int a = 0; a < D - 1; ++a)
        for (int b = 0; b < D - 1; ++b)
          for (int c = 0; c < D - 1; ++c) r.t(a, b, c) = j.t(a, b, c);
    return r;
  }
  double f0(const Vec<D - 1>& y) const override {
    Vec<D> x;
    x << y, 0.0;
    return base_->f0(x);
  }
  std::string name() const override { return base_->name() + "|slice"; }

 private:
  NormPtr<D> base_;
};

inline NormPtr<3> make_quartic_a3(double z0) {
  if (!(z0 > -1.0 && z0 < 1.0)) throw std::invalid_argument("quartic_a3 shift z0 must lie in (-1,1)");
  return std::make_shared<TranslatedGauge<3>>(std::make_shared<QuarticNorm>(1.0), Vec<3>(0, 0, -z0), "quartic_a3");
}

// ---------------------------------------------------------------- duality

template <int D>
struct DualSolveResult {
  double value = 0.0;      // F(x)
  Vec<D> maximizer;        // point on W, = Psi(x/|x|)
  Mat<D> G;                // metric G at the maximizer
  Vec<D> z;                // unnormalized stationary point, reusable as warm start
  int iterations = 0;
  bool converged = false;
};

// F(x) via Newton on D(1/2 F0^2)(z) = x, whose solution is z = F(x) Psi(x).
template <int D>
DualSolveResult<D> support(const Norm<D>& norm, const Vec<D>& x, const Vec<D>* warm = nullptr,
                           double tol = 1e-12, int max_iter = 60) {
  const double xn = x.norm();
  if (!(xn > 0.0)) throw std::invalid_argument("support: x must be nonzero");
  DualSolveResult<D> r;
  Vec<D> z;
  if (warm && warm->allFinite() && warm->norm() > 0.0) {
    z = *warm;
  } else {
    const double f = norm.f0(x);
    z = x * (xn * xn / (f * f));
  }
  auto objective = [&](const Vec<D>& y) {
    const double f = norm.f0(y);
    return 0.5 * f * f - x.dot(y);
  };
  Jet<D> j = norm.jet(z, 2);
  for (int it = 0; it <= max_iter; ++it) {
    const Vec<D> g = j.value * j.grad - x;
    r.G = half_square_hessian(j);
    r.iterations = it;
    if (g.norm() <= tol * std::max(1.0, xn)) {
      r.converged = true;
      break;
    }
    if (it == max_iter) break;
    const Vec<D> step = -r.G.ldlt().solve(g);
    const double f0v = 0.5 * j.value * j.value - x.dot(z);
    double a = 1.0;
    Vec<D> zn = z + step;
    const bool near = g.norm() <= 1e-6 * std::max(1.0, xn);
    for (int ls = 0; ls < 40 && !near; ++ls) {
      zn = z + a * step;
      if (zn.norm() > 0.0 && objective(zn) <= f0v + 1e-4 * a * g.dot(step)) break;
      a *= 0.5;
    }
    z = zn;
    j = norm.jet(z, 2);
  }
  if (!r.converged) throw SolverError("support: dual solve did not converge");
  r.z = z;
  r.maximizer = z / j.value;
  r.value = x.dot(r.maximizer);
  return r;
}

template <int D>
Vec<D> cahn_hoffman(const Norm<D>& norm, const Vec<D>& unit) {
  return support(norm, unit).maximizer;
}

template <int D>
Mat<D> metric_G(const Norm<D>& norm, const Vec<D>& xi) {
  return half_square_hessian(norm.jet(xi, 2));
}

template <int D>
std::array<double, D * D * D> tensor_Q(const Norm<D>& norm, const Vec<D>& xi) {
  return half_square_third(norm.jet(xi, 3));
}

// F(nu) D^2F(nu) = G(xi)^{-1} - xi xi^T with xi = Psi(nu).
template <int D>
Mat<D> hess_F_from_dual(const DualSolveResult<D>& s) {
  Mat<D> M = s.G.inverse() - s.maximizer * s.maximizer.transpose();
  M = 0.5 * (M + M.transpose()).eval();
  return M / s.value;
}

// Orthonormal basis of the complement of a unit vector, as columns.
template <int D>
Eigen::Matrix<double, D, D - 1> tangent_basis(const Vec<D>& nu) {
  Mat<D> P = Mat<D>::Identity() - nu * nu.transpose();
  Eigen::Matrix<double, D, D - 1> B;
  int filled = 0;
  Vec<D> order_idx;
  for (int i = 0; i < D; ++i) order_idx[i] = std::abs(nu[i]);
  std::vector<int> idx(D);
  for (int i = 0; i < D; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return order_idx[a] < order_idx[b]; });
  for (int c : idx) {
    if (filled == D - 1) break;
    Vec<D> v = P.col(c);
    for (int m = 0; m < filled; ++m) v -= B.col(m).dot(v) * B.col(m);
    const double n = v.norm();
    if (n < 1e-8) continue;
    B.col(filled++) = v / n;
  }
  return B;
}

template <int D>
Mat<D - 1> a_f_matrix(const Norm<D>& norm, const Vec<D>& nu) {
  const auto s = support(norm, nu);
  const Mat<D> H = hess_F_from_dual(s);
  const auto B = tangent_basis<D>(nu);
  Mat<D - 1> A = B.transpose() * H * B;
  return 0.5 * (A + A.transpose());
}

// Fibonacci points on S^2; for other dimensions a deterministic lattice.
template <int D>
std::vector<Vec<D>> sphere_samples(int count) {
  std::vector<Vec<D>> out;
  out.reserve(count);
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  for (int i = 0; i < count; ++i) {
    Vec<D> v;
    if constexpr (D == 2) {
      const double a = 2.0 * M_PI * (i + 0.5) / count;
      v << std::cos(a), std::sin(a);
    } else if constexpr (D == 3) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = 2.0 * M_PI * i / golden;
      v << r * std::cos(a), r * std::sin(a), z;
    } else {
      // Hopf-style lattice on S^3
      const double t = (i + 0.5) / count;
      const double eta = std::asin(std::sqrt(t));
      const double a1 = 2.0 * M_PI * i / golden;
      const double a2 = 2.0 * M_PI * i * (golden - 1.0) * std::sqrt(2.0);
      v << std::sin(eta) * std::cos(a1), std::sin(eta) * std::sin(a1), std::cos(eta) * std::cos(a2),
          std::cos(eta) * std::sin(a2);
    }
    out.push_back(v);
  }
  return out;
}

struct DualityReport {
  double f0_residual = 0.0;     // |F0(Psi(x)) - 1|
  double grad_residual = 0.0;   // |DF0(Psi(x)) - x/F(x)|
  double metric_residual = 0.0; // |G(nu_F)(nu_F,Y) - <Y,nu>/F(nu)|
  int samples = 0;
};

template <int D>
DualityReport verify_duality(const Norm<D>& norm, int samples, unsigned seed = 42) {
  DualityReport rep;
  rep.samples = samples;
  const auto pts = sphere_samples<D>(samples);
  const auto dirs = sphere_samples<D>(samples + 7);
  (void)seed;
  for (int i = 0; i < samples; ++i) {
    const Vec<D>& x = pts[i];
    const auto s = support(norm, x);
    const Jet<D> j = norm.jet(s.maximizer, 2);
    rep.f0_residual = std::max(rep.f0_residual, std::abs(j.value - 1.0));
    rep.grad_residual = std::max(rep.grad_residual, (j.grad - x / s.value).norm());
    const Vec<D>& Y = dirs[(i * 3 + 1) % dirs.size()];
    const Mat<D> G = half_square_hessian(j);
    const double lhs = s.maximizer.dot(G * Y);
    rep.metric_residual = std::max(rep.metric_residual, std::abs(lhs - Y.dot(x) / s.value));
  }
  return rep;
}

// Smallest eigenvalue of D^2(1/2 F0^2) over sphere samples.
template <int D>
double ellipticity_min_eigenvalue(const Norm<D>& norm, int samples = 1000) {
  double m = 1e300;
  for (const auto& x : sphere_samples<D>(samples)) {
    Eigen::SelfAdjointEigenSolver<Mat<D>> es(metric_G(norm, x), Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues()[0]);
  }
  return m;
}

template <int D>
double homogeneity_residual(const Norm<D>& norm, int samples = 200) {
  double m = 0.0;
  for (const auto& x : sphere_samples<D>(samples)) {
    const double f = norm.f0(x);
    for (double l : {0.5, 2.0}) m = std::max(m, std::abs(norm.f0(l * x) - l * f) / (l * f));
  }
  return m;
}

}  // namespace capflow
