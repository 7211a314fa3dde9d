#pragma once

#include "surface.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace capflow {

struct FlowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Integrator { Euler, Chebyshev };

struct FlowConfig {
  double t_end = 10.0;
  double cfl_sigma = 0.4;
  double convergence_tol = 1e-2;
  double boundary_tol = 1e-8;
  int snapshot_every = 1;
  Integrator integrator = Integrator::Chebyshev;
  double chebyshev_dt = 0.002;     // Chebyshev step while sup|f| >= transient_level
  double chebyshev_dt_max = 0.02;  // step cap once the speed has decayed
  double transient_level = 0.05;
  double dt_override = 0.0;    // fixed step, bypasses the stability bound
  long max_steps = 2000000;
  bool polar_filter = true;
  int filter_min_modes = 1;    // Fourier modes always kept on polar rings
  bool volume_correction = true;  // remove the discrete mean of f from the applied speed
  double blowup_phi = 20.0;
  bool boundary_form = true;   // record V2 by the boundary formula as well
  std::function<void(const GraphSurface<2>&, long step)> on_snapshot;
};

struct FlowRecord {
  long step = 0;
  double t = 0, dt = 0;
  double V0 = 0, V1_boundary = 0, V1_interior = 0, V2_interior = 0, V2_boundary = 0, V3_interior = 0;
  double supF = 0, min_kappaF = 0, min_ubar = 0;
  double mink_res_k0 = 0, mink_res_k1 = 0;
  double mean_f = 0;     // mean of f w.r.t. dmu_F (zero for the continuous flow)
  double vol_rate = 0;   // integral of the applied speed against dmu_F
  double V1_rate = 0;    // trace-free form of dV1/dt
  double V2_rate = 0;    // (n-1)/(n+1) integral of f H_2 dmu_F
  double rate_err_k0 = NAN, rate_err_k1 = NAN, rate_err_k2 = NAN;
  double barrier_violation = 0;
  double psi = 0;
};

struct Barriers {
  double r1 = 0, r2 = 0;
  std::vector<double> rho_w1;  // radial function of W_{1,w0} at cells
};

struct FlowResult {
  enum class Status { Converged, ReachedEnd, BlowUp, MaxSteps } status = Status::ReachedEnd;
  std::string message;
  std::vector<FlowRecord> trace;
  GraphSurface<2> final;
  Barriers barriers;
  double r0 = NAN, radial_deviation = NAN;
  long steps = 0;
  explicit FlowResult(std::shared_ptr<const HalfSphereGrid<2>> g) : final(std::move(g)) {}
  bool converged() const { return status == Status::Converged; }
};

inline const char* status_name(FlowResult::Status s) {
  switch (s) {
    case FlowResult::Status::Converged: return "converged";
    case FlowResult::Status::ReachedEnd: return "reached_t_end";
    case FlowResult::Status::BlowUp: return "blow_up";
    case FlowResult::Status::MaxSteps: return "max_steps";
  }
  return "?";
}

// ------------------------------------------------------------ initial data

// x_D^2 times a seeded polynomial of degree <= 3, scaled to max |P| = 1 on the interior cells.
template <int N>
std::vector<double> perturbation_field(const HalfSphereGrid<N>& g, unsigned long seed, int degree = 3) {
  constexpr int D = N + 1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<std::pair<std::array<int, D>, double>> terms;
  std::array<int, D> e{};
  // all exponent vectors with total degree <= degree, in lexicographic order
  std::function<void(int, int)> gen = [&](int axis, int left) {
    if (axis == D) {
      terms.emplace_back(e, U(rng));
      return;
    }
    for (int p = 0; p <= left; ++p) {
      e[axis] = p;
      gen(axis + 1, left - p);
    }
    e[axis] = 0;
  };
  gen(0, degree);
  std::vector<double> P(g.total());
  double m = 0;
  for (int c = 0; c < g.total(); ++c) {
    const Vec<D>& x = g.frame(c).x;
    double p = 0;
    for (const auto& [ex, w] : terms) {
      double t = w;
      for (int a = 0; a < D; ++a) t *= std::pow(x[a], ex[a]);
      p += t;
    }
    P[c] = x[D - 1] * x[D - 1] * p;
    if (c < g.interior()) m = std::max(m, std::abs(P[c]));
  }
  for (double& p : P) p /= m;
  return P;
}

// rho <- rho (1 + eps P), followed by a boundary projection of the ghost layer.
template <int N>
GraphSurface<N> perturbed_cap(GeometryEngine<N>& eng, double radius, double eps, unsigned long seed) {
  const auto& g = eng.grid_ptr();
  const CapillaryWulffShape<N + 1> shape(eng.norm_ptr(), radius, eng.anchor());
  GraphSurface<N> s = graph_of_shape<N>(g, shape);
  const auto P = perturbation_field<N>(*g, seed);
  for (int c = 0; c < g->total(); ++c) s.phi[c] += std::log1p(eps * P[c]);
  eng.enforce_boundary(s);
  return s;
}

// ---------------------------------------------------------------- barriers

inline Barriers make_barriers(const GraphSurface<2>& s, const GeometryEngine<2>& eng) {
  const auto& g = *s.grid;
  const auto& a = eng.anchor();
  double C3 = 1e300, C4 = 0;
  for (int c = 0; c < g.interior(); ++c) {
    const double v = eng.norm().f0(std::exp(s.phi[c]) * g.frame(c).x);
    C3 = std::min(C3, v);
    C4 = std::max(C4, v);
  }
  const Vec<3> eta = a.omega0 * a.e_f;
  Barriers b;
  b.r1 = C3 / (2 * (1 + eng.norm().f0(eta)));
  b.r2 = 2 * C4 / (1 - eng.norm().f0(Vec<3>(-eta)));
  const CapillaryWulffShape<3> w1(eng.norm_ptr(), 1.0, a);
  b.rho_w1.resize(g.interior());
  for (int c = 0; c < g.interior(); ++c) b.rho_w1[c] = w1.radial_function(g.frame(c).x);
  return b;
}

inline double barrier_violation(const GraphSurface<2>& s, const Barriers& b) {
  double m = 0;
  for (std::size_t c = 0; c < b.rho_w1.size(); ++c) {
    const double r = std::exp(s.phi[c]);
    m = std::max({m, b.r1 * b.rho_w1[c] - r, r - b.r2 * b.rho_w1[c]});
  }
  return m;
}

// ------------------------------------------------------------------- flow

class FlowSolver {
 public:
  FlowSolver(std::shared_ptr<GeometryEngine<2>> eng, FlowConfig cfg) : eng_(std::move(eng)), cfg_(std::move(cfg)) {
    if (!(cfg_.cfl_sigma > 0 && cfg_.cfl_sigma < 1)) throw std::invalid_argument("cfl_sigma must lie in (0, 1)");
    const auto& g = eng_->grid();
    const double sc = g.db() / g.dl();
    keep_.assign(g.nb(), g.nl() / 2);
    for (int i = 0; i < g.nb(); ++i) {
      const double sb = std::sin(g.beta(i));
      if (sb < sc && cfg_.polar_filter)
        keep_[i] = std::max(cfg_.filter_min_modes, static_cast<int>(std::floor(g.nl() / 2.0 * sb / sc)));
    }
    // stiffness of the retained modes relative to the unfiltered bound 8 / h_beta^2
    stiff_ = 1.0;
    for (int i = 0; i < g.nb(); ++i) {
      const double m = std::min(keep_[i], g.nl() / 2);
      const double s = std::sin(m * g.dl() / 2) / (g.dl() * std::sin(g.beta(i)));
      stiff_ = std::max(stiff_, (4 / (g.db() * g.db()) + 4 * s * s) * g.db() * g.db() / 8);
    }
    const int nl = g.nl();
    cos_.resize(nl * nl);
    sin_.resize(nl * nl);
    for (int m = 0; m < nl; ++m)
      for (int k = 0; k < nl; ++k) {
        cos_[m * nl + k] = std::cos(2 * M_PI * m * k / nl);
        sin_[m * nl + k] = std::sin(2 * M_PI * m * k / nl);
      }
  }

  GeometryEngine<2>& engine() { return *eng_; }
  const FlowConfig& config() const { return cfg_; }

  // Largest stable forward-Euler step (no safety factor) for the diffusion bound.
  double euler_limit(const GeometryBundle<2>& B) const {
    double dmax = 0;
    for (double d : B.diff) dmax = std::max(dmax, d);
    const double h = eng_->grid().db();
    return h * h / (2 * 2 * dmax * stiff_);
  }

  // Filtered tendency of phi on the interior cells.
  std::vector<double> tendency(const GeometryBundle<2>& B) const {
    std::vector<double> r = B.rhs;
    if (cfg_.volume_correction) {
      double a = 0, m = 0;
      for (std::size_t c = 0; c < r.size(); ++c) {
        m += B.f[c] * B.F[c] * B.dmu_g[c];
        a += B.F[c] * B.dmu_g[c];
      }
      m /= a;
      for (std::size_t c = 0; c < r.size(); ++c) r[c] -= m * B.pref[c];
    }
    if (cfg_.polar_filter) filter(r);
    return r;
  }

  // One step from s; returns the step taken. The bundle B must describe s.
  double step(GraphSurface<2>& s, const GeometryBundle<2>& B, double t_left) {
    const double lim = euler_limit(B);
    if (cfg_.dt_override > 0) return euler(s, B, std::min(cfg_.dt_override, t_left));
    if (cfg_.integrator == Integrator::Euler) return euler(s, B, std::min(cfg_.cfl_sigma * lim, t_left));
    const double supf = sup_abs<2>(B.f);
    const double grow = supf < cfg_.transient_level ? cfg_.transient_level / std::max(supf, 1e-300) : 1.0;
    const double dt = std::min({cfg_.chebyshev_dt * grow, cfg_.chebyshev_dt_max, t_left});
    // stability interval of the damped first-order Chebyshev method is about 1.9 s^2 / rho
    const double rho = 2.0 / lim;
    const int stages = std::max(1, static_cast<int>(std::ceil(std::sqrt(dt * rho / (cfg_.cfl_sigma * 1.9)))));
    if (stages == 1) return euler(s, B, std::min(dt, cfg_.cfl_sigma * lim));
    return chebyshev(s, B, dt, stages);
  }

  FlowResult run(const GraphSurface<2>& initial) {
    FlowResult res(initial.grid);
    GraphSurface<2> s = initial;
    if (cfg_.polar_filter) regularize(s.phi);
    auto bc = eng_->enforce_boundary(s, cfg_.boundary_tol);
    if (bc.failed_node >= 0)
      throw FlowError("boundary Newton failed at node " + std::to_string(bc.failed_node));
    res.barriers = make_barriers(s, *eng_);
    long step_no = 0;
    double last_dt = 0;
    auto blow = [&](const std::string& why) {
      res.status = FlowResult::Status::BlowUp;
      res.message = why;
    };
    while (true) {
      GeometryBundle<2> B;
      try {
        B = eng_->evaluate(s, true);
      } catch (const GeometryError& e) {
        blow(e.what());
        break;
      }
      const bool snap = step_no % cfg_.snapshot_every == 0;
      const double supf = sup_abs<2>(B.f);
      const bool done = supf < cfg_.convergence_tol;
      const bool end = s.time >= cfg_.t_end - 1e-12;
      if (snap || done || end) {
        res.trace.push_back(record(s, B, step_no, last_dt, res.barriers));
        if (cfg_.on_snapshot) cfg_.on_snapshot(s, step_no);
      }
      if (done) {
        res.status = FlowResult::Status::Converged;
        break;
      }
      if (end) {
        res.status = FlowResult::Status::ReachedEnd;
        break;
      }
      if (step_no >= cfg_.max_steps) {
        res.status = FlowResult::Status::MaxSteps;
        break;
      }
      try {
        last_dt = step(s, B, cfg_.t_end - s.time);
      } catch (const GeometryError& e) {
        blow(e.what());
        break;
      } catch (const FlowError& e) {
        blow(e.what());
        break;
      }
      ++step_no;
      double m = 0;
      bool finite = true;
      for (double p : s.phi) {
        finite = finite && std::isfinite(p);
        m = std::max(m, std::abs(p));
      }
      if (!finite || m > cfg_.blowup_phi) {
        blow(!finite ? "non-finite phi" : "sup|phi| exceeds blow-up bound");
        break;
      }
    }
    res.steps = step_no;
    fill_rate_errors(res.trace);
    res.final = s;
    if (res.converged()) fit_radius(res, s);
    return res;
  }

  FlowRecord record(const GraphSurface<2>& s, const GeometryBundle<2>& B, long step_no, double dt,
                    const Barriers& bar) {
    const double w0 = eng_->omega0();
    FlowRecord r;
    r.step = step_no;
    r.t = s.time;
    r.dt = dt;
    r.V0 = enclosed_volume(s);
    r.V1_boundary = capillary_area(*eng_, s, B);
    r.V1_interior = quermassintegral_interior(B, 0, w0);
    r.V2_interior = quermassintegral_interior(B, 1, w0);
    r.V3_interior = quermassintegral_interior(B, 2, w0);
    r.V2_boundary = cfg_.boundary_form ? quermassintegral_boundary(*eng_, s, B, 1) : NAN;
    r.supF = sup_abs<2>(B.f);
    r.min_kappaF = *std::min_element(B.kmin.begin(), B.kmin.end());
    r.min_ubar = *std::min_element(B.ubar.begin(), B.ubar.end());
    r.mink_res_k0 = minkowski_residual(B, 0, w0);
    r.mink_res_k1 = minkowski_residual(B, 1, w0);
    double area = 0, fm = 0;
    for (std::size_t c = 0; c < B.f.size(); ++c) {
      area += B.F[c] * B.dmu_g[c];
      fm += B.f[c] * B.F[c] * B.dmu_g[c];
    }
    r.mean_f = fm / area;
    const double shift = cfg_.volume_correction ? r.mean_f : 0.0;
    double vr = 0, v1 = 0, v2 = 0;
    for (std::size_t c = 0; c < B.f.size(); ++c) {
      const double dmuF = B.F[c] * B.dmu_g[c];
      const double f = B.f[c] - shift;  // speed actually applied
      vr += f * dmuF;
      v1 += B.trfree[c] * B.uhat[c] * dmuF;
      v2 += f * B.H[c][2] * dmuF;
    }
    const int n = 2;
    r.vol_rate = vr;
    r.V1_rate = -static_cast<double>(n) / ((n + 1) * (n - 1)) * v1;
    r.V2_rate = static_cast<double>(n - 1) / (n + 1) * v2;
    r.barrier_violation = barrier_violation(s, bar);
    r.psi = B.max_psi;
    return r;
  }

 private:
  std::shared_ptr<GeometryEngine<2>> eng_;
  FlowConfig cfg_;
  std::vector<int> keep_;
  double stiff_ = 1.0;
  std::vector<double> cos_, sin_;

  void filter(std::vector<double>& r) const {
    const auto& g = eng_->grid();
    const int nl = g.nl();
    std::vector<double> a(nl), b(nl), row(nl);
    for (int i = 0; i < g.nb(); ++i) {
      const int K = keep_[i];
      if (K >= nl / 2) continue;
      for (int k = 0; k < nl; ++k) row[k] = r[g.index(i, 0, k)];
      for (int m = 0; m <= K; ++m) {
        double ac = 0, as = 0;
        for (int k = 0; k < nl; ++k) {
          ac += row[k] * cos_[m * nl + k];
          as += row[k] * sin_[m * nl + k];
        }
        a[m] = ac;
        b[m] = as;
      }
      for (int k = 0; k < nl; ++k) {
        double v = a[0] / nl;
        for (int m = 1; m <= K; ++m) v += 2.0 / nl * (a[m] * cos_[m * nl + k] + b[m] * sin_[m * nl + k]);
        r[g.index(i, 0, k)] = v;
      }
    }
  }

  // Filtered modes of phi follow the next ring outward with the sin^m(beta) decay of a smooth field.
  void regularize(std::vector<double>& phi) const {
    const auto& g = eng_->grid();
    const int nl = g.nl(), half = nl / 2;
    int outer = -1;
    for (int i = 0; i < g.nb(); ++i)
      if (keep_[i] < half) outer = i;
    if (outer < 0) return;
    std::vector<double> A(half + 1), B(half + 1), An(half + 1), Bn(half + 1);
    auto analyse = [&](int i, std::vector<double>& a, std::vector<double>& b) {
      for (int m = 0; m <= half; ++m) {
        double ac = 0, as = 0;
        for (int k = 0; k < nl; ++k) {
          const double v = phi[g.index(i, 0, k)];
          ac += v * cos_[m * nl + k];
          as += v * sin_[m * nl + k];
        }
        a[m] = ac;
        b[m] = as;
      }
    };
    analyse(outer + 1, An, Bn);
    for (int i = outer; i >= 0; --i) {
      analyse(i, A, B);
      const double ratio = std::sin(g.beta(i)) / std::sin(g.beta(i + 1));
      for (int m = keep_[i] + 1; m <= half; ++m) {
        const double r = std::pow(ratio, m);
        A[m] = r * An[m];
        B[m] = r * Bn[m];
      }
      for (int k = 0; k < nl; ++k) {
        double v = A[0] / nl + A[half] * cos_[half * nl + k] / nl;
        for (int m = 1; m < half; ++m) v += 2.0 / nl * (A[m] * cos_[m * nl + k] + B[m] * sin_[m * nl + k]);
        phi[g.index(i, 0, k)] = v;
      }
      An.swap(A);
      Bn.swap(B);
    }
  }

  void project(GraphSurface<2>& s) {
    if (cfg_.polar_filter) regularize(s.phi);
    const auto rep = eng_->enforce_boundary(s, cfg_.boundary_tol);
    if (rep.failed_node >= 0)
      throw FlowError("boundary Newton failed at node " + std::to_string(rep.failed_node) +
                      " (|psi| = " + std::to_string(rep.max_psi) + ")");
  }

  double euler(GraphSurface<2>& s, const GeometryBundle<2>& B, double dt) {
    if (!(dt > 1e-12)) throw FlowError("time step underflow");
    const auto r = tendency(B);
    for (std::size_t c = 0; c < r.size(); ++c) s.phi[c] += dt * r[c];
    s.time += dt;
    project(s);
    return dt;
  }

  // Damped first-order Runge-Kutta-Chebyshev step with the given stage count.
  double chebyshev(GraphSurface<2>& s, const GeometryBundle<2>& B, double dt, int st) {
    const double eps = 0.05;
    const double w0 = 1 + eps / (st * st);
    // Chebyshev polynomials T_j(w0) and T_s'(w0)
    std::vector<double> T(st + 1), dT(st + 1);
    T[0] = 1;
    T[1] = w0;
    dT[0] = 0;
    dT[1] = 1;
    for (int j = 2; j <= st; ++j) {
      T[j] = 2 * w0 * T[j - 1] - T[j - 2];
      dT[j] = 2 * T[j - 1] + 2 * w0 * dT[j - 1] - dT[j - 2];
    }
    const double w1 = T[st] / dT[st];
    const int n = static_cast<int>(B.rhs.size());
    GraphSurface<2> y0 = s, y1 = s;
    auto r = tendency(B);
    for (int c = 0; c < n; ++c) y1.phi[c] = y0.phi[c] + (w1 / w0) * dt * r[c];
    project(y1);
    GraphSurface<2> ym2 = y0, ym1 = y1;
    for (int j = 2; j <= st; ++j) {
      const double mu = 2 * w0 * T[j - 1] / T[j];
      const double nu = -T[j - 2] / T[j];
      const double mut = 2 * w1 * T[j - 1] / T[j];
      const auto Bj = eng_->evaluate(ym1, false);
      r = tendency(Bj);
      GraphSurface<2> yj = ym1;
      for (int c = 0; c < n; ++c) yj.phi[c] = mu * ym1.phi[c] + nu * ym2.phi[c] + mut * dt * r[c];
      project(yj);
      ym2 = std::move(ym1);
      ym1 = std::move(yj);
    }
    const double t = s.time + dt;
    s.phi = std::move(ym1.phi);
    s.time = t;
    return dt;
  }

  void fill_rate_errors(std::vector<FlowRecord>& tr) const {
    for (std::size_t j = 1; j + 1 < tr.size(); ++j) {
      const double h = tr[j + 1].t - tr[j - 1].t;
      if (!(h > 0)) continue;
      const double d0 = (tr[j + 1].V0 - tr[j - 1].V0) / h;
      const double d1 = (tr[j + 1].V1_interior - tr[j - 1].V1_interior) / h;
      const double d2 = (tr[j + 1].V2_interior - tr[j - 1].V2_interior) / h;
      tr[j].rate_err_k0 = std::abs(d0 - tr[j].vol_rate);
      tr[j].rate_err_k1 = std::abs(d1 - tr[j].V1_rate) / std::max(std::abs(tr[j].V1_rate), 1e-300);
      tr[j].rate_err_k2 = std::abs(d2 - tr[j].V2_rate) / std::max(std::abs(tr[j].V2_rate), 1e-300);
    }
  }

  void fit_radius(FlowResult& res, const GraphSurface<2>& s) const {
    const CapillaryWulffShape<3> w1(eng_->norm_ptr(), 1.0, eng_->anchor());
    const auto g = s.grid;
    GraphSurface<2> unit = graph_of_shape<2>(g, w1);
    res.r0 = std::pow(enclosed_volume(s) / enclosed_volume(unit), 1.0 / 3.0);
    double m = 0;
    for (int c = 0; c < g->interior(); ++c)
      m = std::max(m, std::abs(std::exp(s.phi[c]) - res.r0 * std::exp(unit.phi[c])));
    res.radial_deviation = m / res.r0;
  }
};

// ------------------------------------------------------------------ output

inline const char* trace_header() {
  return "t,dt,V0,V1_boundary,V1_interior,V2_interior,supF,min_kappaF,min_ubar,mink_res_k0,mink_res_k1,"
         "rate_err_k0,rate_err_k1";
}

inline void write_trace_csv(const std::string& path, const std::vector<FlowRecord>& tr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(12);
  out << trace_header() << "\n";
  for (const auto& r : tr)
    out << r.t << "," << r.dt << "," << r.V0 << "," << r.V1_boundary << "," << r.V1_interior << "," << r.V2_interior
        << "," << r.supF << "," << r.min_kappaF << "," << r.min_ubar << "," << r.mink_res_k0 << "," << r.mink_res_k1
        << "," << r.rate_err_k0 << "," << r.rate_err_k1 << "\n";
}

}  // namespace capflow
