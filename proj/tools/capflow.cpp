// capflow: simulate, check-condition, verify, norm-info.
#include "capflow/config.hpp"
#include "capflow/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace capflow;

namespace {

constexpr int kOk = 0, kFailed = 1, kInput = 2, kBlowUp = 3;

int input_error(const std::string& what) {
  std::cerr << "error: " << what << "\n";
  return kInput;
}

struct Monitors {
  double v0_drift = 0, v1_max_increase = -1e300, ubar_start = 0, ubar_min = 1e300, barrier = 0;
  double kappa_start = 0, kappa_min = 1e300;
  bool volume() const { return v0_drift <= 5e-3; }
  bool v1_monotone() const { return v1_max_increase <= 1e-6; }
  bool ubar() const { return ubar_min >= ubar_start - 1e-4; }
  bool contained() const { return barrier <= 1e-3; }
};

Monitors monitor(const std::vector<FlowRecord>& T) {
  Monitors m;
  if (T.empty()) return m;
  m.ubar_start = T[0].min_ubar;
  m.kappa_start = T[0].min_kappaF;
  for (std::size_t j = 0; j < T.size(); ++j) {
    m.v0_drift = std::max(m.v0_drift, std::abs(T[j].V0 - T[0].V0) / T[0].V0);
    if (j) m.v1_max_increase = std::max(m.v1_max_increase, (T[j].V1_boundary - T[j - 1].V1_boundary) / T[j - 1].V1_boundary);
    m.ubar_min = std::min(m.ubar_min, T[j].min_ubar);
    m.kappa_min = std::min(m.kappa_min, T[j].min_kappaF);
    m.barrier = std::max(m.barrier, T[j].barrier_violation);
  }
  return m;
}

const char* verdict(bool ok) { return ok ? "ok" : "violated"; }

void write_report(const fs::path& path, const RunConfig& cfg, double omega0, const FlowResult& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(10);
  const Monitors m = monitor(r.trace);
  const FlowRecord last = r.trace.empty() ? FlowRecord{} : r.trace.back();
  out << "norm = " << cfg.str("norm.type", "sphere") << "\n"
      << "omega0 = " << omega0 << "\n"
      << "status = " << status_name(r.status) << "\n"
      << "converged = " << (r.converged() ? "true" : "false") << "\n"
      << "message = " << r.message << "\n"
      << "steps = " << r.steps << "\n"
      << "t_final = " << last.t << "\n"
      << "supF_final = " << last.supF << "\n"
      << "r0 = " << r.r0 << "\n"
      << "radial_deviation = " << r.radial_deviation << "\n"
      << "V0_relative_drift = " << m.v0_drift << "\n"
      << "V1_max_step_increase = " << m.v1_max_increase << "\n"
      << "min_ubar_start = " << m.ubar_start << "\n"
      << "min_ubar_min = " << m.ubar_min << "\n"
      << "barrier_violation_max = " << m.barrier << "\n"
      << "min_kappaF_start = " << m.kappa_start << "\n"
      << "min_kappaF_min = " << m.kappa_min << "\n"
      << "monitor_volume = " << verdict(m.volume()) << "\n"
      << "monitor_V1_monotone = " << verdict(m.v1_monotone()) << "\n"
      << "monitor_ubar = " << verdict(m.ubar()) << "\n"
      << "monitor_barrier = " << verdict(m.contained()) << "\n";
}

int cmd_simulate(const fs::path& config_path, const std::string& out_override) {
  RunConfig cfg;
  NormPtr<3> norm;
  double omega0 = 0;
  std::shared_ptr<GeometryEngine<2>> eng;
  FlowConfig fc;
  GraphSurface<2> initial(std::make_shared<HalfSphereGrid<2>>(8, 8));
  fs::path dir;
  long obj_every = 0;
  try {
    cfg = RunConfig::load(config_path);
    if (cfg.integer("norm.dimension", 3) != 3) throw ConfigError("simulate supports norm.dimension = 3 only");
    norm = make_norm<3>(cfg);
    omega0 = cfg.num("flow.omega0", -0.5);
    const AnchorVector<3> anchor = anchor_vector(*norm, omega0);
    const long nb = cfg.integer("grid.n_beta", 64);
    const auto grid = std::make_shared<HalfSphereGrid<2>>(nb, cfg.integer("grid.n_lambda", 2 * nb));
    eng = std::make_shared<GeometryEngine<2>>(grid, norm, anchor);
    fc = make_flow_config(cfg);
    const std::string init = cfg.str("flow.initial", "perturbed_cap");
    const double radius = cfg.num("flow.radius", 1.0);
    if (!(radius > 0)) throw ConfigError("flow.radius must be positive");
    if (init == "perturbed_cap") {
      initial = perturbed_cap(*eng, radius, cfg.num("flow.epsilon", 0.1), cfg.integer("flow.seed", 42));
    } else if (init == "wulff_cap") {
      initial = graph_of_shape<2>(grid, CapillaryWulffShape<3>(norm, radius, anchor));
    } else {
      throw ConfigError("flow.initial must be perturbed_cap or wulff_cap");
    }
    dir = out_override.empty() ? cfg.path("output.dir", "out") : fs::path(out_override);
    obj_every = cfg.integer("output.obj_every", 0);
    fs::create_directories(dir);
  } catch (const std::exception& e) {
    return input_error(e.what());
  }
  if (obj_every > 0)
    fc.on_snapshot = [&](const GraphSurface<2>& s, long step) {
      if (step % obj_every == 0) write_obj((dir / ("snap_" + std::to_string(step) + ".obj")).string(), *eng, s);
    };
  FlowSolver solver(eng, fc);
  FlowResult r(initial.grid);
  try {
    r = solver.run(initial);
  } catch (const FlowError& e) {
    return input_error(std::string("initial data: ") + e.what());
  }
  const fs::path trace = dir / cfg.str("output.trace", "trace.csv");
  const fs::path report = dir / cfg.str("output.report", "report.txt");
  write_trace_csv(trace.string(), r.trace);
  write_report(report, cfg, omega0, r);
  std::cout << "status = " << status_name(r.status) << "\nsteps = " << r.steps << "\ntrace = " << trace.string()
            << "\nreport = " << report.string() << "\n";
  if (r.status == FlowResult::Status::BlowUp) {
    std::cerr << "blow-up: " << r.message << "\n";
    return kBlowUp;
  }
  return kOk;
}

template <int D>
int check_condition_in(const RunConfig& cfg, const fs::path& samples_path) {
  const NormPtr<D> norm = make_norm<D>(cfg);
  const double omega0 = cfg.num("flow.omega0", 0.0);
  const int slices = static_cast<int>(cfg.integer("condition.slice_samples", 512));
  if (slices < 4) throw ConfigError("condition.slice_samples must be >= 4");
  const auto rep = check_condition<D>(norm, omega0, slices);
  std::ofstream csv(samples_path);
  if (!csv) throw std::runtime_error("cannot write " + samples_path.string());
  csv.precision(12);
  csv << "sample";
  for (int i = 0; i < D; ++i) csv << ",z" << i;
  for (int i = 0; i < D; ++i) csv << ",Y" << i;
  csv << ",margin,margin_flipped,margin_translated,degenerate\n";
  for (std::size_t k = 0; k < rep.samples.size(); ++k) {
    const auto& s = rep.samples[k];
    csv << k;
    for (int i = 0; i < D; ++i) csv << "," << s.z[i];
    for (int i = 0; i < D; ++i) csv << "," << s.Y[i];
    csv << "," << s.margin << "," << s.margin_flipped << "," << s.margin_translated << "," << s.degenerate << "\n";
  }
  std::cout.precision(10);
  std::cout << "norm = " << cfg.str("norm.type", "sphere") << "\n"
            << "omega0 = " << omega0 << "\n"
            << "min_margin = " << rep.min_margin << "\n"
            << "min_margin_translated = " << rep.min_margin_translated << "\n"
            << "satisfied = " << (rep.satisfied ? "true" : "false") << "\n"
            << "forms_agree = " << (rep.both_forms_agree ? "true" : "false") << "\n"
            << "degenerate_samples = " << rep.degenerate_count << "\n"
            << "samples_csv_path = " << samples_path.string() << "\n";
  if (cfg.flag("condition.scan", false)) {
    const auto scan = scan_max_omega<D>(norm, cfg.num("condition.scan_lo", -0.5), cfg.num("condition.scan_hi", 0.5), slices);
    const char* st = scan.status == ScanResult::Status::SignChange                ? "sign_change"
                     : scan.status == ScanResult::Status::WholeBracketAdmissible ? "whole_bracket_admissible"
                                                                                  : "whole_bracket_violated";
    std::cout << "scan_max_omega = " << scan.value << "\nscan_status = " << st << "\n";
  }
  return kOk;
}

int cmd_check_condition(const fs::path& config_path, const std::string& out_override) {
  try {
    const RunConfig cfg = RunConfig::load(config_path);
    const fs::path dir = out_override.empty() ? cfg.path("output.dir", "out") : fs::path(out_override);
    fs::create_directories(dir);
    const fs::path samples = dir / cfg.str("output.samples", "condition_samples.csv");
    const long d = cfg.integer("norm.dimension", 3);
    if (d == 3) return check_condition_in<3>(cfg, samples);
    if (d == 4) return check_condition_in<4>(cfg, samples);
    throw ConfigError("norm.dimension must be 3 or 4");
  } catch (const std::exception& e) {
    return input_error(e.what());
  }
}

template <int D>
void print_norm_info(const RunConfig& cfg) {
  const NormPtr<D> norm = make_norm<D>(cfg);
  const auto [lo, hi] = admissible_interval(*norm);
  std::cout.precision(10);
  std::cout << "norm = " << cfg.str("norm.type", "sphere") << "\n"
            << "dimension = " << D << "\n"
            << "F(E_" << D << ") = " << -lo << "\n"
            << "F(-E_" << D << ") = " << hi << "\n"
            << "ellipticity_min_eigenvalue = " << ellipticity_min_eigenvalue(*norm) << "\n"
            << "admissible_omega0 = (" << lo << ", " << hi << ")\n";
}

int cmd_norm_info(const std::string& config_path, const std::string& name) {
  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      cfg = RunConfig::load(config_path);
    } else {
      std::istringstream in("norm.type = " + name);
      cfg = RunConfig::parse(in);
    }
    const long d = cfg.integer("norm.dimension", 3);
    if (d == 3) print_norm_info<3>(cfg);
    else if (d == 4) print_norm_info<4>(cfg);
    else throw ConfigError("norm.dimension must be 3 or 4");
    return kOk;
  } catch (const std::exception& e) {
    return input_error(e.what());
  }
}

int cmd_verify(const std::string& suite) {
  const auto& names = Verifier::suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    std::string list;
    for (const auto& n : names) list += " " + n;
    return input_error("unknown suite '" + suite + "'; choose one of:" + list);
  }
  Verifier v;
  bool ok = true;
  for (const auto& c : v.suite(suite)) {
    std::cout << criterion_line(c) << "\n";
    for (const auto& l : c.lines) std::cout << "    " << l << "\n";
    std::cout.flush();
    ok = ok && c.pass;
  }
  return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic capillary curvature flow in the half-space"};
  app.require_subcommand(1);

  std::string sim_cfg, cond_cfg, info_cfg, info_norm = "sphere", suite, sim_out, cond_out;
  auto* sim = app.add_subcommand("simulate", "run the flow from a config file");
  sim->add_option("--config", sim_cfg, "config file")->required();
  sim->add_option("--output-dir", sim_out, "overrides output.dir");
  auto* cond = app.add_subcommand("check-condition", "sample the admissibility condition");
  cond->add_option("--config", cond_cfg, "config file")->required();
  cond->add_option("--output-dir", cond_out, "overrides output.dir");
  auto* ver = app.add_subcommand("verify", "run a verification suite");
  ver->add_option("suite", suite, "duality | appendix-a | wulff-static | minkowski | flow-conservation | inequalities")
      ->required();
  auto* info = app.add_subcommand("norm-info", "print basic data of a norm");
  info->add_option("--config", info_cfg, "config file");
  info->add_option("--norm", info_norm, "norm.type when no config is given");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInput;
  }
  if (*sim) return cmd_simulate(sim_cfg, sim_out);
  if (*cond) return cmd_check_condition(cond_cfg, cond_out);
  if (*ver) return cmd_verify(suite);
  if (*info) return cmd_norm_info(info_cfg, info_norm);
  return kInput;
}
