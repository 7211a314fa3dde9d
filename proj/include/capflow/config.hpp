#pragma once

#include "flow.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace capflow {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat "section.key = value" text; '#' starts a comment.
class RunConfig {
 public:
  static RunConfig parse(std::istream& in, const std::filesystem::path& base = ".") {
    RunConfig c;
    c.base_ = base;
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("line " + std::to_string(no) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (!known().count(key)) throw ConfigError("line " + std::to_string(no) + ": unknown key '" + key + "'");
      if (c.values_.count(key)) throw ConfigError("line " + std::to_string(no) + ": duplicate key '" + key + "'");
      c.values_[key] = val;
    }
    return c;
  }

  static RunConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    return parse(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
  }

  bool has(const std::string& k) const { return values_.count(k) > 0; }

  std::string str(const std::string& k, const std::string& def) const {
    const auto it = values_.find(k);
    if (it == values_.end()) return def;
    std::string v = it->second;
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    return v;
  }

  double num(const std::string& k, double def) const {
    if (!has(k)) return def;
    const std::string v = str(k, "");
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("key '" + k + "': not a number: " + v);
    }
  }

  long integer(const std::string& k, long def) const {
    const double d = num(k, static_cast<double>(def));
    if (d != std::floor(d)) throw ConfigError("key '" + k + "': expected an integer");
    return static_cast<long>(d);
  }

  bool flag(const std::string& k, bool def) const {
    if (!has(k)) return def;
    const std::string v = str(k, "");
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("key '" + k + "': expected true or false");
  }

  std::vector<double> array(const std::string& k, std::vector<double> def) const {
    if (!has(k)) return def;
    std::string v = str(k, "");
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') throw ConfigError("key '" + k + "': expected [a, b, ...]");
    std::vector<double> out;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("key '" + k + "': bad array entry '" + item + "'");
      }
    }
    return out;
  }

  std::filesystem::path path(const std::string& k, const std::string& def) const {
    const std::filesystem::path p = str(k, def);
    return p.is_absolute() ? p : base_ / p;
  }

  static const std::set<std::string>& known() {
    static const std::set<std::string> keys = {
        "norm.type", "norm.axes", "norm.z0", "norm.expr", "norm.dimension",
        "flow.omega0", "flow.t_end", "flow.cfl_sigma", "flow.convergence_tol", "flow.boundary_tol",
        "flow.snapshot_every", "flow.integrator", "flow.dt", "flow.chebyshev_dt", "flow.chebyshev_dt_max",
        "flow.max_steps", "flow.polar_filter", "flow.volume_correction", "flow.initial", "flow.radius",
        "flow.epsilon", "flow.seed",
        "grid.n_beta", "grid.n_lambda",
        "condition.slice_samples", "condition.scan", "condition.scan_lo", "condition.scan_hi",
        "output.dir", "output.trace", "output.report", "output.samples", "output.obj_every"};
    return keys;
  }

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_ = ".";

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }
};

// Builds the norm named by norm.type in dimension D.
template <int D>
NormPtr<D> make_norm(const RunConfig& c) {
  const std::string t = c.str("norm.type", "sphere");
  if (t == "sphere") return std::make_shared<SphereNorm<D>>();
  if (t == "ellipsoid") {
    const auto a = c.array("norm.axes", std::vector<double>(D, 1.0));
    if (static_cast<int>(a.size()) != D) throw ConfigError("norm.axes needs " + std::to_string(D) + " entries");
    Vec<D> v;
    for (int i = 0; i < D; ++i) {
      if (!(a[i] > 0)) throw ConfigError("norm.axes entries must be positive");
      v[i] = a[i];
    }
    return std::make_shared<EllipsoidNorm<D>>(v);
  }
  if (t == "expr") {
    if (!c.has("norm.expr")) throw ConfigError("norm.type = expr needs norm.expr");
    try {
      return std::make_shared<ExprNorm<D>>(parse(c.str("norm.expr", ""), D));
    } catch (const ParseError& e) {
      throw ConfigError(std::string("norm.expr: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("norm.expr: ") + e.what());
    }
  }
  if constexpr (D == 3) {
    if (t == "quartic_a2") return std::make_shared<QuarticNorm>(1.0);
    if (t == "quartic_a2_prime") return std::make_shared<QuarticNorm>(2.0);
    if (t == "quartic_a3") return make_quartic_a3(c.num("norm.z0", 0.3));
  }
  throw ConfigError("unknown norm.type '" + t + "' for dimension " + std::to_string(D));
}

inline Integrator parse_integrator(const std::string& s) {
  if (s == "euler") return Integrator::Euler;
  if (s == "chebyshev") return Integrator::Chebyshev;
  throw ConfigError("flow.integrator must be euler or chebyshev");
}

inline FlowConfig make_flow_config(const RunConfig& c) {
  FlowConfig f;
  f.t_end = c.num("flow.t_end", f.t_end);
  f.cfl_sigma = c.num("flow.cfl_sigma", f.cfl_sigma);
  if (!(f.cfl_sigma > 0 && f.cfl_sigma < 1)) throw ConfigError("flow.cfl_sigma must lie in (0, 1)");
  f.convergence_tol = c.num("flow.convergence_tol", f.convergence_tol);
  f.boundary_tol = c.num("flow.boundary_tol", f.boundary_tol);
  f.snapshot_every = static_cast<int>(c.integer("flow.snapshot_every", f.snapshot_every));
  if (f.snapshot_every < 1) throw ConfigError("flow.snapshot_every must be >= 1");
  f.integrator = parse_integrator(c.str("flow.integrator", "chebyshev"));
  f.dt_override = c.num("flow.dt", 0.0);
  f.chebyshev_dt = c.num("flow.chebyshev_dt", f.chebyshev_dt);
  f.chebyshev_dt_max = c.num("flow.chebyshev_dt_max", f.chebyshev_dt_max);
  f.max_steps = c.integer("flow.max_steps", f.max_steps);
  f.polar_filter = c.flag("flow.polar_filter", f.polar_filter);
  f.volume_correction = c.flag("flow.volume_correction", f.volume_correction);
  return f;
}

}  // namespace capflow
