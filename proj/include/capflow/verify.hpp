#pragma once

#include "condition.hpp"
#include "expr.hpp"
#include "flow.hpp"

#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

namespace capflow {

struct Criterion {
  int id = 0;
  std::string name;
  bool pass = false;
  std::vector<std::string> lines;  // measured values, one per check
};

inline std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
inline std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// Named reference norms in R^3.
inline NormPtr<3> reference_norm(const std::string& name) {
  if (name == "sphere") return std::make_shared<SphereNorm<3>>();
  if (name == "ellipsoid") return std::make_shared<EllipsoidNorm<3>>(Vec<3>(4, 1, 1));
  if (name == "quartic_a2") return std::make_shared<QuarticNorm>(1.0);
  if (name == "quartic_a3") return make_quartic_a3(0.3);
  throw std::invalid_argument("unknown reference norm " + name);
}

struct CapCase {
  std::string label, norm;
  double omega0;
};

struct CapValues {
  double supf, mk0, mk1, V0, V1, V2i, V2b;
};

// Checks for criteria 1-11, grouped into the CLI suites. Expensive runs are cached.
class Verifier {
 public:
  static const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> s = {"duality",      "appendix-a",        "wulff-static",
                                               "minkowski",    "flow-conservation", "inequalities"};
    return s;
  }

  std::vector<Criterion> suite(const std::string& name) {
    if (name == "duality") return {duality(), quadratic_q()};
    if (name == "appendix-a") return {appendix_a()};
    if (name == "wulff-static") return {static_caps()};
    if (name == "minkowski") return {minkowski(), quermass()};
    if (name == "flow-conservation") return {conservation(), rates(), convergence(), convexity()};
    if (name == "inequalities") return {inequalities()};
    throw std::invalid_argument("unknown suite '" + name + "'");
  }

  std::vector<Criterion> all() {
    std::vector<Criterion> out;
    for (const auto& s : suite_names())
      for (auto& c : suite(s)) out.push_back(std::move(c));
    std::sort(out.begin(), out.end(), [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
    return out;
  }

  // 1
  Criterion duality() {
    Criterion c{1, "duality identities", true, {}};
    for (const auto& [name, tol] : std::vector<std::pair<std::string, double>>{
             {"sphere", 1e-12}, {"ellipsoid", 1e-7}, {"quartic_a2", 1e-7}}) {
      const auto r = verify_duality(*reference_norm(name), 100);
      const double worst = std::max({r.f0_residual, r.grad_residual, r.metric_residual});
      const bool ok = worst <= tol;
      c.pass = c.pass && ok;
      c.lines.push_back(fmt("%s: F0 %.1e grad %.1e metric %.1e (tol %.0e)", name.c_str(), r.f0_residual,
                            r.grad_residual, r.metric_residual, tol));
    }
    return c;
  }

  // 2
  Criterion quadratic_q() {
    Criterion c{2, "quadratic norms have Q = 0", true, {}};
    const std::vector<std::pair<std::string, NormPtr<3>>> norms = {
        {"sphere", reference_norm("sphere")},
        {"ellipsoid(4,1,1)", reference_norm("ellipsoid")},
        {"expr sqrt(x^2+2y^2+3z^2+xy)", std::make_shared<ExprNorm<3>>(parse("sqrt(x^2 + 2*y^2 + 3*z^2 + x*y)"))}};
    for (const auto& [name, n] : norms) {
      double m = 0;
      for (const auto& x : sphere_samples<3>(100))
        for (double q : tensor_Q(*n, x)) m = std::max(m, std::abs(q));
      c.pass = c.pass && m <= 1e-10;
      c.lines.push_back(fmt("%s: max |Q_ijk| %.1e", name.c_str(), m));
    }
    return c;
  }

  // 3
  Criterion appendix_a() {
    Criterion c{3, "condition thresholds", true, {}};
    for (const std::string name : {"sphere", "quartic_a2"}) {
      const auto s = scan_max_omega<3>(reference_norm(name), -0.5, 0.5);
      const bool ok = s.status == ScanResult::Status::SignChange && std::abs(s.value) <= 1e-3;
      c.pass = c.pass && ok;
      c.lines.push_back(fmt("%s: max admissible omega0 %.5f (want 0 +- 1e-3)", name.c_str(), s.value));
    }
    const auto a3 = check_condition<3>(reference_norm("quartic_a3"), 0.3);
    const bool ok3 = a3.satisfied && std::abs(a3.min_margin) <= 1e-5;
    c.pass = c.pass && ok3;
    c.lines.push_back(fmt("quartic_a3 z0 = 0.3, omega0 = 0.3: satisfied %d, min_margin %.2e", a3.satisfied,
                          a3.min_margin));
    bool agree = a3.both_forms_agree;
    for (const auto& [name, w] : std::vector<std::pair<std::string, double>>{
             {"sphere", -0.5}, {"sphere", 0.2}, {"quartic_a2", -0.3}, {"quartic_a2", 0.1}, {"ellipsoid", -0.2}})
      agree = agree && check_condition<3>(reference_norm(name), w, 128).both_forms_agree;
    c.pass = c.pass && agree;
    c.lines.push_back(fmt("original and translated forms agree in sign: %s", agree ? "yes" : "no"));
    return c;
  }

  // 4
  Criterion static_caps() {
    Criterion c{4, "static Wulff caps", true, {}};
    for (const auto& k : cap_battery(false)) {
      const double a = cap(k, 64).supf, b = cap(k, 128).supf;
      // Below 1e-6 the residual is boundary-solver noise and has no order.
      const bool resolved = a > 1e-6;
      const double order = resolved ? std::log2(a / b) : NAN;
      const bool ok = a <= 5e-3 && b <= 1.5e-3 && (!resolved || order >= 1.5);
      c.pass = c.pass && ok;
      c.lines.push_back(fmt("%s: sup|f| %.2e (64x128) %.2e (128x256) order %.2f", k.label.c_str(), a, b, order));
    }
    return c;
  }

  // 5
  Criterion minkowski() {
    Criterion c{5, "Minkowski formulas", true, {}};
    for (const auto& k : cap_battery(true)) {
      const auto a = cap(k, 32), b = cap(k, 64);
      const double ea = std::max(std::abs(a.mk0), std::abs(a.mk1)), eb = std::max(std::abs(b.mk0), std::abs(b.mk1));
      const double ratio = ea / eb;
      const bool ok = eb <= 1e-3 && (eb <= 1e-9 || ratio >= 3.0);  // exact caps sit at roundoff
      c.pass = c.pass && ok;
      c.lines.push_back(fmt("%s: k0 %.1e k1 %.1e (64x128) refinement ratio %.2f", k.label.c_str(), b.mk0, b.mk1,
                            ratio));
    }
    return c;
  }

  // 6
  Criterion quermass() {
    Criterion c{6, "quermassintegral consistency", true, {}};
    double worst_bi = 0, worst_eq = 0;
    for (const auto& k : cap_battery(true)) {
      const auto v = cap(k, 64);
      worst_bi = std::max(worst_bi, std::abs(v.V2b - v.V2i) / std::abs(v.V2i));
      worst_eq = std::max({worst_eq, std::abs(v.V1 - v.V0) / v.V0, std::abs(v.V2i - v.V0) / v.V0});
    }
    for (const auto& st : star_battery()) {
      const auto v = star(st);
      worst_bi = std::max(worst_bi, std::abs(v.V2b - v.V2i) / std::abs(v.V2i));
    }
    const auto pi3 = cap(cap_battery(false)[0], 64);
    const double ref = 5 * M_PI / 24;
    const bool ok_cap = std::abs(pi3.V0 - ref) <= 1e-3 && std::abs(pi3.V1 - ref) <= 1e-3;
    c.pass = worst_bi <= 5e-3 && worst_eq <= 2e-3 && ok_cap;
    c.lines.push_back(fmt("V2 boundary vs interior: max relative gap %.1e over caps and star battery", worst_bi));
    c.lines.push_back(fmt("V1, V2 vs V0 on W_{1,w0}: max relative gap %.1e", worst_eq));
    c.lines.push_back(fmt("theta = pi/3 cap: V0 %.6f V1 %.6f (5pi/24 = %.6f)", pi3.V0, pi3.V1, ref));
    return c;
  }

  // 7
  Criterion conservation() {
    Criterion c{7, "flow conservation and monotonicity", true, {}};
    for (const auto& k : flow_battery()) {
      const auto& T = flow(k, 64).trace;
      double dv = 0, inc = -1e300, ubar = 1e300, bar = 0;
      for (std::size_t j = 0; j < T.size(); ++j) {
        dv = std::max(dv, std::abs(T[j].V0 - T[0].V0) / T[0].V0);
        if (j) inc = std::max(inc, (T[j].V1_boundary - T[j - 1].V1_boundary) / T[j - 1].V1_boundary);
        ubar = std::min(ubar, T[j].min_ubar);
        bar = std::max(bar, T[j].barrier_violation);
      }
      const bool ok = dv <= 5e-3 && inc <= 1e-6 && ubar >= T[0].min_ubar - 1e-4 && bar <= 1e-3;
      c.pass = c.pass && ok;
      c.lines.push_back(fmt("%s: |dV0|/V0 %.1e, max step change of V1 %.1e V1, min ubar %.4f (start %.4f), barrier %.1e",
                            k.label.c_str(), dv, inc, ubar, T[0].min_ubar, bar));
    }
    return c;
  }

  // 8
  Criterion rates() {
    Criterion c{8, "rate formulas in the transient", true, {}};
    for (const auto& k : flow_battery()) {
      const auto& fine = flow(k, 64).trace;
      const auto& coarse = flow(k, 32).trace;
      double raw1 = 0, raw2 = 0, ex1 = 0, ex2 = 0;
      int used = 0;
      for (std::size_t j = 1; j + 1 < std::min(fine.size(), coarse.size()); ++j) {
        if (fine[j].supF <= 0.05 || coarse[j].supF <= 0.05) continue;
        if (std::abs(fine[j].t - coarse[j].t) > 1e-12) continue;
        const double a1 = signed_rate_gap(coarse, j, 1), b1 = signed_rate_gap(fine, j, 1);
        const double a2 = signed_rate_gap(coarse, j, 2), b2 = signed_rate_gap(fine, j, 2);
        raw1 = std::max(raw1, std::abs(b1));
        raw2 = std::max(raw2, std::abs(b2));
        ex1 = std::max(ex1, std::abs((4 * b1 - a1) / 3));
        ex2 = std::max(ex2, std::abs((4 * b2 - a2) / 3));
        ++used;
      }
      const bool ok = used > 0 && ex1 <= 0.05 && ex2 <= 0.05;
      c.pass = c.pass && ok;
      c.lines.push_back(fmt("%s (%d transient records): dV1/dt gap %.2f%% dV2/dt gap %.2f%% extrapolated in h; "
                            "64x128 raw %.2f%% %.2f%%",
                            k.label.c_str(), used, 100 * ex1, 100 * ex2, 100 * raw1, 100 * raw2));
    }
    return c;
  }

  // 9
  Criterion convergence() {
    Criterion c{9, "convergence to the capillary Wulff shape", true, {}};
    for (const auto& k : flow_battery()) {
      const auto& r = flow(k, 64);
      const bool ok = r.converged() && r.trace.back().supF <= 1e-2 && r.radial_deviation <= 1e-2;
      c.pass = c.pass && ok;
      c.lines.push_back(fmt("%s: %s at t = %.3f, sup|f| %.2e, r0 %.5f, radial deviation %.2f%% of r0",
                            k.label.c_str(), status_name(r.status), r.trace.back().t, r.trace.back().supF, r.r0,
                            100 * r.radial_deviation));
    }
    return c;
  }

  // 11
  Criterion convexity() {
    Criterion c{11, "convexity preservation witness", true, {}};
    for (const auto& k : flow_battery()) {
      const auto cond = check_condition<3>(reference_norm(k.norm), k.omega0, 128);
      const auto& T = flow(k, 64).trace;
      double m = 1e300;
      for (const auto& r : T) m = std::min(m, r.min_kappaF);
      const bool ok = cond.satisfied && T[0].min_kappaF > 0 && m >= 0.5 * T[0].min_kappaF;
      c.pass = c.pass && ok;
      c.lines.push_back(fmt("%s (condition satisfied %d): min kappa_F %.4f at start, %.4f over the run",
                            k.label.c_str(), cond.satisfied, T[0].min_kappaF, m));
    }
    const auto& ctl = control_run();
    const auto cond = check_condition<3>(reference_norm("quartic_a2"), 0.3, 128);
    std::ostringstream tr;
    const auto& T = ctl.trace;
    const std::size_t stride = std::max<std::size_t>(1, T.size() / 6);
    for (std::size_t j = 0; j < T.size(); j += stride) tr << fmt(" t=%.2f:%.4f", T[j].t, T[j].min_kappaF);
    tr << fmt(" t=%.2f:%.4f", T.back().t, T.back().min_kappaF);
    c.lines.push_back(fmt("control quartic_a2 omega0 = +0.3 (condition satisfied %d, %s, not graded): min kappa_F",
                          cond.satisfied, status_name(ctl.status)) +
                      tr.str());
    return c;
  }

  // 10
  Criterion inequalities() {
    Criterion c{10, "isoperimetric and Alexandrov-Fenchel inequalities", true, {}};
    double worst = 1e300;
    for (const auto& st : star_battery()) {
      const auto v = star(st);
      const auto w = cap({"", st.norm, st.omega0}, 64);
      const double gap = v.V1 / w.V1 - std::pow(v.V0 / w.V0, 2.0 / 3.0);
      worst = std::min(worst, gap);
    }
    c.pass = worst >= -1e-3;
    c.lines.push_back(fmt("isoperimetric, %zu star-shaped surfaces: min slack %.3e", star_battery().size(), worst));

    double af2 = 1e300;
    int used2 = 0;
    for (const auto& st : convex_battery()) {
      if (!check_condition<3>(reference_norm(st.norm), st.omega0, 128).satisfied) continue;
      const auto v = star(st);
      if (!(v.kmin > 0)) continue;
      const auto w = cap({"", st.norm, st.omega0}, 64);
      af2 = std::min(af2, std::pow(v.V1 / w.V1, 0.5) - std::pow(v.V0 / w.V0, 1.0 / 3.0));
      ++used2;
    }
    const bool ok2 = used2 == static_cast<int>(convex_battery().size()) && af2 >= -1e-3;
    c.pass = c.pass && ok2;
    c.lines.push_back(fmt("n = 2, k = 1 on %d convex surfaces under the condition: min slack %.3e", used2, af2));

    const auto [af31, af32, used3] = af_n3();
    const bool ok3 = used3 > 0 && af31 >= -1e-3 && af32 >= -1e-3;
    c.pass = c.pass && ok3;
    c.lines.push_back(fmt("n = 3 (16x16x32), %d convex surfaces: min slack k = 1 %.3e, k = 2 %.3e", used3, af31, af32));
    return c;
  }

  static std::vector<CapCase> cap_battery(bool with_ellipsoid) {
    std::vector<CapCase> b = {{"sphere theta=pi/3", "sphere", -0.5},
                              {"sphere theta=pi/2", "sphere", 0.0},
                              {"quartic_a2 omega0=-0.3", "quartic_a2", -0.3}};
    if (with_ellipsoid) b.push_back({"ellipsoid(4,1,1) omega0=-0.2", "ellipsoid", -0.2});
    return b;
  }

  static std::vector<CapCase> flow_battery() {
    return {{"sphere theta=pi/3", "sphere", -0.5}, {"quartic_a2 omega0=-0.3", "quartic_a2", -0.3}};
  }

  struct StarCase {
    std::string norm;
    double omega0, radius, eps;
    unsigned long seed;
  };

  static std::vector<StarCase> star_battery() {
    return {{"sphere", -0.5, 1.0, 0.3, 1},
            {"sphere", 0.3, 1.2, 0.2, 2},
            {"quartic_a2", -0.3, 0.8, 0.25, 3},
            {"ellipsoid", 0.2, 1.0, 0.2, 4},
            {"quartic_a2", 0.1, 1.3, 0.3, 5}};
  }

  static std::vector<StarCase> convex_battery() {
    return {{"sphere", -0.5, 1.0, 0.05, 11}, {"quartic_a2", -0.3, 1.1, 0.05, 12}, {"ellipsoid", -0.2, 0.9, 0.01, 13}};
  }

 private:
  struct StarValues {
    double V0, V1, V2i, V2b, kmin;
  };

  std::map<std::pair<std::string, int>, CapValues> caps_;
  std::map<std::pair<std::string, int>, FlowResult> flows_;
  std::optional<FlowResult> control_;

  static std::shared_ptr<const HalfSphereGrid<2>> grid(int nb) { return std::make_shared<HalfSphereGrid<2>>(nb, 2 * nb); }

  CapValues cap(const CapCase& k, int nb) {
    const auto key = std::make_pair(k.norm + fmt("%.6f", k.omega0), nb);
    if (auto it = caps_.find(key); it != caps_.end()) return it->second;
    const auto n = reference_norm(k.norm);
    const CapillaryWulffShape<3> shape(n, 1.0, k.omega0);
    const auto g = grid(nb);
    auto s = graph_of_shape<2>(g, shape);
    GeometryEngine<2> eng(g, n, shape.anchor());
    eng.enforce_boundary(s);
    const auto B = eng.evaluate(s, false);
    const CapValues v{sup_abs<2>(B.f),
                      minkowski_residual(B, 0, k.omega0),
                      minkowski_residual(B, 1, k.omega0),
                      enclosed_volume(s),
                      capillary_area(eng, s, B),
                      quermassintegral_interior(B, 1, k.omega0),
                      quermassintegral_boundary(eng, s, B, 1)};
    caps_[key] = v;
    return v;
  }

  static StarValues star(const StarCase& st) {
    const auto n = reference_norm(st.norm);
    const auto g = grid(64);
    GeometryEngine<2> eng(g, n, anchor_vector(*n, st.omega0));
    const auto s = perturbed_cap(eng, st.radius, st.eps, st.seed);
    const auto B = eng.evaluate(s, true);
    return {enclosed_volume(s), capillary_area(eng, s, B), quermassintegral_interior(B, 1, st.omega0),
            quermassintegral_boundary(eng, s, B, 1), *std::min_element(B.kmin.begin(), B.kmin.end())};
  }

  static std::tuple<double, double, int> af_n3() {
    const std::vector<std::tuple<NormPtr<4>, double, unsigned long>> cases = {
        {std::make_shared<SphereNorm<4>>(), -0.4, 21},
        {std::make_shared<EllipsoidNorm<4>>(Vec<4>(1.5, 1, 1, 1.2)), -0.3, 22}};
    const auto g = std::make_shared<HalfSphereGrid<3>>(16, 32, 16);
    double s1 = 1e300, s2 = 1e300;
    int used = 0;
    for (const auto& [n, w0, seed] : cases) {
      if (!check_condition<4>(n, w0, 64).satisfied) continue;
      GeometryEngine<3> eng(g, n, anchor_vector(*n, w0));
      const CapillaryWulffShape<4> shape(n, 1.0, eng.anchor());
      auto w = graph_of_shape<3>(g, shape);
      eng.enforce_boundary(w);
      const auto Bw = eng.evaluate(w, false);
      const auto s = perturbed_cap(eng, 1.0, 0.05, seed);
      const auto B = eng.evaluate(s, true);
      if (!(*std::min_element(B.kmin.begin(), B.kmin.end()) > 0)) continue;
      const double r0 = std::pow(enclosed_volume(s) / enclosed_volume(w), 0.25);
      const double r1 = capillary_area(eng, s, B) / capillary_area(eng, w, Bw);
      const double r2 = quermassintegral_interior(B, 1, w0) / quermassintegral_interior(Bw, 1, w0);
      s1 = std::min(s1, std::pow(r1, 1.0 / 3.0) - r0);
      s2 = std::min(s2, std::pow(r2, 1.0 / 2.0) - r0);
      ++used;
    }
    return {s1, s2, used};
  }

  // The 32x64 companion only needs the transient window.
  const FlowResult& flow(const CapCase& k, int nb) {
    const auto key = std::make_pair(k.label, nb);
    if (auto it = flows_.find(key); it != flows_.end()) return it->second;
    FlowConfig cfg;
    if (nb < 64) cfg.t_end = 0.3;
    return flows_.emplace(key, run_flow(k.norm, k.omega0, nb, cfg)).first->second;
  }

  const FlowResult& control_run() {
    if (!control_) {
      FlowConfig cfg;
      cfg.t_end = 0.5;
      control_.emplace(run_flow("quartic_a2", 0.3, 32, cfg));
    }
    return *control_;
  }

  static FlowResult run_flow(const std::string& norm, double omega0, int nb, const FlowConfig& cfg) {
    const auto n = reference_norm(norm);
    auto eng = std::make_shared<GeometryEngine<2>>(grid(nb), n, anchor_vector(*n, omega0));
    const auto s = perturbed_cap(*eng, 1.0, 0.1, 42);
    FlowSolver solver(eng, cfg);
    return solver.run(s);
  }

  // Signed relative gap between the centred difference of V_k and its rate formula.
  static double signed_rate_gap(const std::vector<FlowRecord>& T, std::size_t j, int k) {
    const double h = T[j + 1].t - T[j - 1].t;
    const double d = k == 1 ? (T[j + 1].V1_interior - T[j - 1].V1_interior) / h
                            : (T[j + 1].V2_interior - T[j - 1].V2_interior) / h;
    const double r = k == 1 ? T[j].V1_rate : T[j].V2_rate;
    return (d - r) / std::abs(r);
  }
};

inline std::string criterion_line(const Criterion& c) {
  return fmt("%s criterion %d: %s", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str());
}

}  // namespace capflow
