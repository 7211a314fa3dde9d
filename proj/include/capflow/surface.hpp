#pragma once

#include "grid.hpp"
#include "wulff.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace capflow {

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Radial graph rho = exp(phi) over the half-sphere lattice (ghost row included).
template <int N>
struct GraphSurface {
  std::shared_ptr<const HalfSphereGrid<N>> grid;
  std::vector<double> phi;
  double time = 0.0;

  explicit GraphSurface(std::shared_ptr<const HalfSphereGrid<N>> g) : grid(std::move(g)), phi(grid->total(), 0.0) {}
};

template <int N>
struct GeometryBundle {
  static constexpr int D = N + 1;
  std::vector<Vec<D>> X, nu, nuF;
  std::vector<double> rho, v, u, F, uhat, ubar, GE, f, pref, rhs, dmu_g, trfree, diff, kmin, kmax;
  std::vector<std::array<double, N + 1>> H;      // normalized H^F_k, k = 0..N
  std::vector<std::array<double, N>> kappa;      // anisotropic principal curvatures
  double max_psi = 0.0;                          // boundary capillarity residual

  void resize(int n) {
    X.resize(n);
    nu.resize(n);
    nuF.resize(n);
    for (auto* a : {&rho, &v, &u, &F, &uhat, &ubar, &GE, &f, &pref, &rhs, &dmu_g, &trfree, &diff, &kmin, &kmax}) a->resize(n);
    H.resize(n);
    kappa.resize(n);
  }
};

constexpr double binomial(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Pointwise geometry of the radial graph and boundary treatment for one norm and w0.
template <int N>
class GeometryEngine {
 public:
  static constexpr int D = N + 1;
  static constexpr int S = N * (N + 1) / 2;
  using Grid = HalfSphereGrid<N>;

  GeometryEngine(std::shared_ptr<const Grid> grid, NormPtr<D> norm, const AnchorVector<D>& anchor)
      : grid_(std::move(grid)), norm_(std::move(norm)), anchor_(anchor) {
    warm_.assign(grid_->interior(), Vec<D>::Constant(std::numeric_limits<double>::quiet_NaN()));
    warm_face_.assign(grid_->ring(), Vec<D>::Constant(std::numeric_limits<double>::quiet_NaN()));
    const std::vector<double> nodes4 = {-2.5, -1.5, -0.5, 0.5};
    face_val_ = lagrange_weights(nodes4, 0.0, 0);
    face_der_ = lagrange_weights(nodes4, 0.0, 1);
    face_ext_ = lagrange_weights({-2.5, -1.5, -0.5}, 0.0, 0);
  }

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  const Norm<D>& norm() const { return *norm_; }
  const NormPtr<D>& norm_ptr() const { return norm_; }
  const AnchorVector<D>& anchor() const { return anchor_; }
  double omega0() const { return anchor_.omega0; }

  struct Local {
    Vec<D> X, nu, nuF;
    double rho, v, u, F, uhat, ubar, GE, f, pref, rhs, jac, trfree, diff;
    std::array<double, N + 1> H;
    std::array<double, N> kappa;
  };

  // Centred stencils at an interior cell: phi, first and second coordinate derivatives.
  void stencil(const std::vector<double>& phi, int c, double& p, std::array<double, N>& d1,
               std::array<double, S>& d2) const {
    const int nl = grid_->nl(), na = grid_->na();
    const int i = c / (na * nl), j = (c / nl) % na, k = c % nl;
    p = phi[c];
    for (int a = 0; a < N; ++a) {
      std::array<int, N> o{};
      o[a] = 1;
      const double fp = phi[grid_->neighbor(i, j, k, o)];
      o[a] = -1;
      const double fm = phi[grid_->neighbor(i, j, k, o)];
      const double h = grid_->step(a);
      d1[a] = (fp - fm) / (2 * h);
      d2[sym_index(N, a, a)] = (fp - 2 * p + fm) / (h * h);
    }
    for (int a = 0; a < N; ++a)
      for (int b = a + 1; b < N; ++b) {
        double acc = 0;
        for (int sa = -1; sa <= 1; sa += 2)
          for (int sb = -1; sb <= 1; sb += 2) {
            std::array<int, N> o{};
            o[a] = sa;
            o[b] = sb;
            acc += sa * sb * phi[grid_->neighbor(i, j, k, o)];
          }
        d2[sym_index(N, a, b)] = acc / (4 * grid_->step(a) * grid_->step(b));
      }
  }

  Local local(const typename Grid::Frame& fr, double p, const std::array<double, N>& d1,
              const std::array<double, S>& d2, Vec<D>& warm, bool need_kappa) const {
    Local L;
    const double rho = std::exp(p);
    L.rho = rho;
    L.X = rho * fr.x;
    std::array<Vec<D>, N> Xa;
    for (int a = 0; a < N; ++a) Xa[a] = rho * (d1[a] * fr.x + fr.xd[a]);
    Vec<D> w = fr.x;
    double grad2 = 0;
    for (int a = 0; a < N; ++a) {
      w -= (d1[a] / fr.sigma[a]) * fr.xd[a];
      grad2 += d1[a] * d1[a] / fr.sigma[a];
    }
    L.v = std::sqrt(1.0 + grad2);
    L.nu = w / L.v;
    Mat<N> g, h;
    for (int a = 0; a < N; ++a)
      for (int b = a; b < N; ++b) {
        const int ab = sym_index(N, a, b);
        const Vec<D> Xab =
            rho * ((d2[ab] + d1[a] * d1[b]) * fr.x + d1[a] * fr.xd[b] + d1[b] * fr.xd[a] + fr.xdd[ab]);
        g(a, b) = g(b, a) = Xa[a].dot(Xa[b]);
        h(a, b) = h(b, a) = -Xab.dot(L.nu);
      }
    L.u = rho / L.v;
    const auto ds = support(*norm_, L.nu, &warm);
    warm = ds.z;
    L.F = ds.value;
    L.nuF = ds.maximizer;
    const Mat<D> D2F = hess_F_from_dual(ds);
    Mat<N> P, Gh;
    for (int a = 0; a < N; ++a)
      for (int b = a; b < N; ++b) {
        P(a, b) = P(b, a) = Xa[a].dot(D2F * Xa[b]);
        Gh(a, b) = Gh(b, a) = Xa[a].dot(ds.G * Xa[b]);
      }
    const Mat<N> gi = g.inverse();
    Mat<N> K = gi * P * gi;
    K = 0.5 * (K + K.transpose()).eval();
    const Mat<N> M = K * h;
    const double tr = M.trace();
    const double tr2 = (M * M).trace();
    L.H[0] = 1.0;
    L.H[1] = tr / N;
    if constexpr (N >= 2) L.H[2] = 0.5 * (tr * tr - tr2) / binomial(N, 2);
    if constexpr (N >= 3) L.H[3] = M.determinant();
    L.trfree = tr2 - tr * tr / N;
    L.uhat = L.u / L.F;
    const double nE = L.nu.dot(anchor_.e_f);
    L.GE = nE / L.F;
    L.ubar = L.u / (L.F + anchor_.omega0 * nE);
    L.f = N + N * anchor_.omega0 * L.GE - L.uhat * tr;
    const double pref = L.v * L.F / rho;
    L.pref = pref;
    L.rhs = pref * L.f;
    L.jac = std::pow(rho, N) * L.v;
    // principal part of rhs in phi_ab is pref * uhat * (rho / v) * K^{ab}
    {
      Mat<N> Kp;
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) Kp(a, b) = K(a, b) * std::sqrt(fr.sigma[a] * fr.sigma[b]);
      Kp *= pref * L.uhat * rho / L.v;
      Eigen::SelfAdjointEigenSolver<Mat<N>> es;
      es.computeDirect(Kp, Eigen::EigenvaluesOnly);
      L.diff = es.eigenvalues()[N - 1];
    }
    if (need_kappa) {
      Eigen::LLT<Mat<N>> llt(K);
      const Mat<N> Lc = llt.matrixL();
      Mat<N> Sm = Lc.transpose() * h * Lc;
      Sm = 0.5 * (Sm + Sm.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Mat<N>> es;
      es.computeDirect(Sm, Eigen::EigenvaluesOnly);
      for (int a = 0; a < N; ++a) L.kappa[a] = es.eigenvalues()[a];
    } else {
      L.kappa.fill(std::numeric_limits<double>::quiet_NaN());
    }
    (void)Gh;
    return L;
  }

  // Geometry of every interior cell; kappa only when requested.
  GeometryBundle<N> evaluate(const GraphSurface<N>& s, bool need_kappa = true) {
    GeometryBundle<N> B;
    const int n = grid_->interior();
    B.resize(n);
    double p;
    std::array<double, N> d1;
    std::array<double, S> d2;
    for (int c = 0; c < n; ++c) {
      stencil(s.phi, c, p, d1, d2);
      bool bad = !std::isfinite(p);
      for (double q : d1) bad = bad || !std::isfinite(q);
      for (double q : d2) bad = bad || !std::isfinite(q);
      if (bad) throw GeometryError("non-finite derivative at cell " + std::to_string(c));
      Local L;
      try {
        L = local(grid_->frame(c), p, d1, d2, warm_[c], need_kappa);
      } catch (const SolverError&) {
        throw GeometryError("dual solve failed at cell " + std::to_string(c));
      }
      B.X[c] = L.X;
      B.nu[c] = L.nu;
      B.nuF[c] = L.nuF;
      B.rho[c] = L.rho;
      B.v[c] = L.v;
      B.u[c] = L.u;
      B.F[c] = L.F;
      B.uhat[c] = L.uhat;
      B.ubar[c] = L.ubar;
      B.GE[c] = L.GE;
      B.f[c] = L.f;
      B.pref[c] = L.pref;
      B.rhs[c] = L.rhs;
      B.dmu_g[c] = L.jac * grid_->weight(c);
      B.trfree[c] = L.trfree;
      B.diff[c] = L.diff;
      B.H[c] = L.H;
      B.kappa[c] = L.kappa;
      B.kmin[c] = *std::min_element(L.kappa.begin(), L.kappa.end());
      B.kmax[c] = *std::max_element(L.kappa.begin(), L.kappa.end());
    }
    B.max_psi = boundary_residual(s);
    return B;
  }

  // ------------------------------------------------------------ boundary

  struct FaceState {
    double phi_f;    // face value excluding ghost contribution
    double dphi_b;   // normal derivative excluding ghost contribution
    std::array<double, N> tang;  // tangential derivatives (index 0 unused)
  };

  FaceState face_state(const std::vector<double>& phi, int f) const {
    const int nb = grid_->nb(), nl = grid_->nl();
    const int j = f / nl, k = f % nl;
    FaceState st{};
    st.phi_f = 0;
    st.dphi_b = 0;
    for (int m = 0; m < 3; ++m) {
      const double val = phi[grid_->index(nb - 3 + m, j, k)];
      st.phi_f += face_val_[m] * val;
      st.dphi_b += face_der_[m] * val / grid_->db();
    }
    st.tang[0] = 0;
    for (int a = 1; a < N; ++a) {
      double acc = 0;
      for (int m = 0; m < 3; ++m) {
        const int i = nb - 3 + m;
        auto val = [&](int off) {
          std::array<int, N> o{};
          o[a] = off;
          return phi[grid_->neighbor(i, j, k, o)];
        };
        const double d = (-val(2) + 8 * val(1) - 8 * val(-1) + val(-2)) / (12 * grid_->step(a));
        acc += face_ext_[m] * d;
      }
      st.tang[a] = acc;
    }
    return st;
  }

  double face_phi(const std::vector<double>& phi, int f) const {
    const int nb = grid_->nb(), nl = grid_->nl();
    return face_state(phi, f).phi_f + face_val_[3] * phi[grid_->index(nb, f / nl, f % nl)];
  }

  struct FaceEval {
    Vec<D> nu;
    double psi;
    double dpsi;
    double v;
  };

  FaceEval face_eval(const FaceState& st, int f, double ghost) {
    const auto& fr = grid_->face_frame(f);
    std::array<double, N> d1 = st.tang;
    d1[0] = st.dphi_b + face_der_[3] * ghost / grid_->db();
    Vec<D> w = fr.x;
    double grad2 = 0;
    for (int a = 0; a < N; ++a) {
      w -= (d1[a] / fr.sigma[a]) * fr.xd[a];
      grad2 += d1[a] * d1[a] / fr.sigma[a];
    }
    FaceEval e;
    e.v = std::sqrt(1.0 + grad2);
    e.nu = w / e.v;
    const auto ds = support(*norm_, e.nu, &warm_face_[f]);
    warm_face_[f] = ds.z;
    e.psi = -ds.maximizer[D - 1] - anchor_.omega0;
    const Vec<D> dw = -(face_der_[3] / grid_->db()) * fr.xd[0];
    const Vec<D> dnu = (dw - e.nu.dot(dw) * e.nu) / e.v;
    e.dpsi = -(hess_F_from_dual(ds) * dnu)[D - 1];
    return e;
  }

  struct BoundaryReport {
    double max_psi = 0.0;
    int max_iterations = 0;
    int failed_node = -1;
  };

  // Sets every ghost value so the discrete capillarity residual vanishes.
  BoundaryReport enforce_boundary(GraphSurface<N>& s, double tol = 1e-8) {
    BoundaryReport rep;
    const int nb = grid_->nb(), nl = grid_->nl();
    for (int f = 0; f < grid_->ring(); ++f) {
      const FaceState st = face_state(s.phi, f);
      const int gidx = grid_->index(nb, f / nl, f % nl);
      double g = s.phi[gidx];
      if (!std::isfinite(g)) g = s.phi[grid_->index(nb - 1, f / nl, f % nl)];
      double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
      FaceEval e = face_eval(st, f, g);
      int it = 0;
      for (; it < 50; ++it) {
        if (std::abs(e.psi) <= 1e-14) break;
        // psi decreases with the ghost value
        if (e.psi > 0) lo = std::max(lo, g);
        else hi = std::min(hi, g);
        double step = (e.dpsi < 0) ? -e.psi / e.dpsi : (e.psi > 0 ? 0.1 : -0.1);
        step = std::clamp(step, -0.5, 0.5);
        double ng = g + step;
        if (std::isfinite(lo) && std::isfinite(hi) && !(ng > lo && ng < hi)) ng = 0.5 * (lo + hi);
        if (std::abs(ng - g) <= 1e-15 * std::max(1.0, std::abs(g))) {
          g = ng;
          break;
        }
        g = ng;
        e = face_eval(st, f, g);
      }
      s.phi[gidx] = g;
      rep.max_iterations = std::max(rep.max_iterations, it);
      if (std::abs(e.psi) > rep.max_psi) rep.max_psi = std::abs(e.psi);
      if (std::abs(e.psi) > tol && rep.failed_node < 0) rep.failed_node = f;
    }
    return rep;
  }

  double boundary_residual(const GraphSurface<N>& s) {
    double m = 0;
    const int nb = grid_->nb(), nl = grid_->nl();
    for (int f = 0; f < grid_->ring(); ++f) {
      const FaceState st = face_state(s.phi, f);
      const FaceEval e = face_eval(st, f, s.phi[grid_->index(nb, f / nl, f % nl)]);
      m = std::max(m, std::abs(e.psi));
    }
    return m;
  }

  // Outward normals of the surface at the boundary faces.
  std::vector<Vec<D>> face_normals(const GraphSurface<N>& s) {
    std::vector<Vec<D>> out(grid_->ring());
    const int nb = grid_->nb(), nl = grid_->nl();
    for (int f = 0; f < grid_->ring(); ++f)
      out[f] = face_eval(face_state(s.phi, f), f, s.phi[grid_->index(nb, f / nl, f % nl)]).nu;
    return out;
  }

 private:
  std::shared_ptr<const Grid> grid_;
  NormPtr<D> norm_;
  AnchorVector<D> anchor_;
  std::vector<Vec<D>> warm_, warm_face_;
  std::vector<double> face_val_, face_der_, face_ext_;
};

// ------------------------------------------------------------------ shapes

template <int N>
GraphSurface<N> graph_of_shape(std::shared_ptr<const HalfSphereGrid<N>> grid, const CapillaryWulffShape<N + 1>& shape) {
  GraphSurface<N> s(grid);
  for (int c = 0; c < grid->total(); ++c) s.phi[c] = std::log(shape.radial_function(grid->frame(c).x));
  return s;
}

template <int N>
void scale_surface(GraphSurface<N>& s, double r) {
  const double l = std::log(r);
  for (double& p : s.phi) p += l;
}

// ---------------------------------------------------------------- integrals

template <int N>
double enclosed_volume(const GraphSurface<N>& s) {
  double acc = 0;
  for (int c = 0; c < s.grid->interior(); ++c) acc += std::exp((N + 1) * s.phi[c]) * s.grid->weight(c);
  return acc / (N + 1);
}

template <int N>
double anisotropic_area(const GeometryBundle<N>& B) {
  double acc = 0;
  for (std::size_t c = 0; c < B.F.size(); ++c) acc += B.F[c] * B.dmu_g[c];
  return acc;
}

// Volume of the flat region enclosed by the boundary trace in {x_D = 0}.
template <int N>
double wetting_area(GeometryEngine<N>& eng, const GraphSurface<N>& s) {
  const auto& g = eng.grid();
  double acc = 0;
  for (int f = 0; f < g.ring(); ++f) acc += std::exp(N * eng.face_phi(s.phi, f)) * g.face_weight(f);
  return acc / N;
}

template <int N>
double capillary_area(GeometryEngine<N>& eng, const GraphSurface<N>& s, const GeometryBundle<N>& B) {
  return (anisotropic_area(B) + eng.omega0() * wetting_area(eng, s)) / (N + 1);
}

// V_{k+1} from the interior formula, k = 0..N.
template <int N>
double quermassintegral_interior(const GeometryBundle<N>& B, int k, double omega0) {
  if (k < 0 || k > N) throw std::invalid_argument("k out of range");
  double acc = 0;
  for (std::size_t c = 0; c < B.F.size(); ++c)
    acc += B.H[c][k] * (1.0 + omega0 * B.GE[c]) * B.F[c] * B.dmu_g[c];
  return acc / (N + 1);
}

template <int N>
double minkowski_residual(const GeometryBundle<N>& B, int k, double omega0) {
  if (k < 0 || k >= N) throw std::invalid_argument("k out of range");
  double acc = 0, area = 0;
  for (std::size_t c = 0; c < B.F.size(); ++c) {
    const double dmuF = B.F[c] * B.dmu_g[c];
    acc += (B.H[c][k] * (1.0 + omega0 * B.GE[c]) - B.H[c][k + 1] * B.uhat[c]) * dmuF;
    area += dmuF;
  }
  return acc / area;
}

// Boundary data of the planar trace curve for n = 2.
struct BoundaryCurve {
  std::vector<double> ds;        // arc-length weights
  std::vector<double> Fbar;      // slice support at the outward normal
  std::vector<double> Hbar1;     // anisotropic curvature w.r.t. the slice shape
  std::vector<Vec<3>> nu_bar3;   // outward normal, embedded in R^3
};

inline BoundaryCurve boundary_curve(GeometryEngine<2>& eng, const GraphSurface<2>& s) {
  const auto& g = eng.grid();
  const int nl = g.nl();
  const double dl = g.dl();
  std::vector<double> rho(nl);
  for (int k = 0; k < nl; ++k) rho[k] = std::exp(eng.face_phi(s.phi, k));
  TranslatedNorm<3> tn(eng.norm_ptr(), eng.anchor());
  const RestrictedGauge<3> sg(tn.gauge());
  BoundaryCurve bc;
  bc.ds.resize(nl);
  bc.Fbar.resize(nl);
  bc.Hbar1.resize(nl);
  bc.nu_bar3.resize(nl);
  Vec<2> warm = Vec<2>::Constant(std::numeric_limits<double>::quiet_NaN());
  auto R = [&](int k) { return rho[((k % nl) + nl) % nl]; };
  for (int k = 0; k < nl; ++k) {
    const double r1 = (-R(k + 2) + 8 * R(k + 1) - 8 * R(k - 1) + R(k - 2)) / (12 * dl);
    const double r2 = (-R(k + 2) + 16 * R(k + 1) - 30 * R(k) + 16 * R(k - 1) - R(k - 2)) / (12 * dl * dl);
    const double l = g.lambda(k), cl = std::cos(l), sl = std::sin(l);
    const Vec<2> er(cl, sl), et(-sl, cl);
    const Vec<2> c1 = r1 * er + R(k) * et;
    const Vec<2> c2 = (r2 - R(k)) * er + 2 * r1 * et;
    const double sp = c1.norm();
    const Vec<2> nb(c1[1] / sp, -c1[0] / sp);
    const Vec<2> tb = c1 / sp;
    const double ke = (c1[0] * c2[1] - c1[1] * c2[0]) / (sp * sp * sp);
    const auto ds = support(sg, nb, &warm);
    warm = ds.z;
    const double AF = tb.dot(hess_F_from_dual(ds) * tb);
    bc.ds[k] = sp * dl;
    bc.Fbar[k] = ds.value;
    bc.Hbar1[k] = AF * ke;
    bc.nu_bar3[k] = Vec<3>(nb[0], nb[1], 0.0);
  }
  return bc;
}

// V_{k+1} for n = 2 with the boundary term over the trace curve, k = 1, 2.
inline double quermassintegral_boundary(GeometryEngine<2>& eng, const GraphSurface<2>& s, const GeometryBundle<2>& B,
                                        int k) {
  if (k < 1 || k > 2) throw std::invalid_argument("boundary form needs k in {1, 2} for n = 2");
  double interior = 0;
  for (std::size_t c = 0; c < B.F.size(); ++c) interior += B.H[c][k] * B.F[c] * B.dmu_g[c];
  const BoundaryCurve bc = boundary_curve(eng, s);
  double bdry = 0;
  for (std::size_t m = 0; m < bc.ds.size(); ++m) {
    const double Hb = (k == 1) ? 1.0 : bc.Hbar1[m];
    bdry += Hb * bc.Fbar[m] * bc.ds[m];
  }
  return (interior + eng.omega0() / 2.0 * bdry) / 3.0;
}

template <int N>
double sup_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// ---------------------------------------------------------------- export

inline void write_obj(const std::string& path, GeometryEngine<2>& eng, const GraphSurface<2>& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const auto& g = eng.grid();
  const int nb = g.nb(), nl = g.nl();
  out.precision(12);
  double pole = 0;
  for (int k = 0; k < nl; ++k) pole += std::exp(s.phi[g.index(0, 0, k)]);
  pole /= nl;
  out << "v 0 0 " << pole << "\n";
  for (int i = 0; i < nb; ++i)
    for (int k = 0; k < nl; ++k) {
      const Vec<3> X = std::exp(s.phi[g.index(i, 0, k)]) * g.frame(g.index(i, 0, k)).x;
      out << "v " << X[0] << " " << X[1] << " " << X[2] << "\n";
    }
  for (int k = 0; k < nl; ++k) {
    const Vec<3> X = std::exp(eng.face_phi(s.phi, k)) * g.face_frame(k).x;
    out << "v " << X[0] << " " << X[1] << " " << X[2] << "\n";
  }
  auto vid = [&](int i, int k) { return 2 + i * nl + ((k % nl) + nl) % nl; };  // i = nb is the face row
  for (int k = 0; k < nl; ++k) out << "f 1 " << vid(0, k) << " " << vid(0, k + 1) << "\n";
  for (int i = 0; i < nb; ++i)
    for (int k = 0; k < nl; ++k)
      out << "f " << vid(i, k) << " " << vid(i + 1, k) << " " << vid(i + 1, k + 1) << " " << vid(i, k + 1) << "\n";
}

template <int N>
void write_field_csv(const std::string& path, const GeometryBundle<N>& B, const std::vector<double>& field,
                     const std::string& name) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(12);
  static const char* axes[] = {"x", "y", "z", "w"};
  for (int a = 0; a <= N; ++a) out << axes[a] << ",";
  out << name << "\n";
  for (std::size_t c = 0; c < field.size(); ++c) {
    for (int a = 0; a <= N; ++a) out << B.X[c][a] << ",";
    out << field[c] << "\n";
  }
}

}  // namespace capflow
