#pragma once

// Experiment configuration: sectioned key = value text, a closed key set
// (unknown keys are errors naming the key), CLI overrides applied before
// validation.

#include "hypbq/picard.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace hypbq {

struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ExperimentConfig {
  int d = 2;
  double tau_max = 6.0;
  int n_tau = 64;
  int n_omega = 32;

  SemigroupConfig semigroup;
  SolverConfig solver;

  // Profiles: u0/theta0/du0/dtheta0 are initial-data shapes (modulation
  // ignored), h/F/f drive the forcing terms.
  std::map<std::string, BumpProfile> profiles;

  uint64_t seed = 12345;
  std::string output_dir = "out";

  ManifoldGrid make_grid() const { return build_grid(d, tau_max, n_tau, n_omega); }

  BumpProfile profile(const std::string& name) const {
    auto it = profiles.find(name);
    return it == profiles.end() ? BumpProfile{} : it->second;
  }

  ForcingSet make_forcing(const ManifoldGrid& g) const {
    return ForcingSet::build(g, profile("h"), profile("F"), profile("f"));
  }

  ProblemData make_problem(const ManifoldGrid& g) const {
    ProblemData data;
    data.init = State{profile("u0").vector_field(g), profile("theta0").scalar_field(g), 0.0};
    data.forcing = make_forcing(g);
    return data;
  }

  State make_perturbation(const ManifoldGrid& g) const {
    return State{profile("du0").vector_field(g), profile("dtheta0").scalar_field(g), 0.0};
  }

  void validate() const {
    semigroup.validate();
    solver.validate(d);
    for (const auto& [name, prof] : profiles) prof.validate("forcing." + name);
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_number(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("config: key '" + key + "' has non-numeric value '" + v + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& v) {
  const double x = parse_number(key, v);
  const int i = static_cast<int>(std::lround(x));
  if (std::abs(x - i) > 1e-12)
    throw config_error("config: key '" + key + "' expects an integer, got '" + v + "'");
  return i;
}

inline void apply_profile_key(BumpProfile& p, const std::string& full,
                              const std::string& param, const std::string& v) {
  if (param == "amplitude") p.amplitude = parse_number(full, v);
  else if (param == "center_tau") p.center_tau = parse_number(full, v);
  else if (param == "width") p.width = parse_number(full, v);
  else if (param == "angular_mode") p.angular_mode = parse_int(full, v);
  else if (param == "period") p.period = parse_number(full, v);
  else if (param == "phase") p.phase = parse_number(full, v);
  else if (param == "modulation") {
    if (v == "constant") p.modulation = BumpProfile::Mod::constant;
    else if (v == "cosine") p.modulation = BumpProfile::Mod::cosine;
    else throw config_error("config: key '" + full + "' expects constant|cosine, got '" + v + "'");
  } else {
    throw config_error("config: unknown key '" + full + "'");
  }
}

}  // namespace detail

using ConfigMap = std::map<std::string, std::string>;

inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("config: malformed section header at line " + std::to_string(lineno));
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config: expected key = value at line " + std::to_string(lineno));
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw config_error("config: empty key at line " + std::to_string(lineno));
    if (section.empty())
      throw config_error("config: key '" + key + "' outside any section");
    kv[section + "." + key] = val;
  }
  return kv;
}

inline ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot read file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// "section.key=value" (forcing keys: "forcing.<profile>.<param>=value").
inline void apply_override(ConfigMap& kv, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw config_error("override '" + spec + "' is not of the form key=value");
  const std::string key = detail::trim(spec.substr(0, eq));
  const std::string val = detail::trim(spec.substr(eq + 1));
  if (key.find('.') == std::string::npos)
    throw config_error("override key '" + key + "' must be section-qualified");
  kv[key] = val;
}

inline ExperimentConfig materialize_config(const ConfigMap& kv) {
  static const std::vector<std::string> profile_names = {"u0", "theta0", "du0",
                                                         "dtheta0", "h", "F", "f"};
  ExperimentConfig cfg;
  for (const auto& [full, v] : kv) {
    const auto dot = full.find('.');
    const std::string section = full.substr(0, dot);
    const std::string key = full.substr(dot + 1);
    if (section == "manifold") {
      if (key == "d") cfg.d = detail::parse_int(full, v);
      else if (key == "tau_max") cfg.tau_max = detail::parse_number(full, v);
      else if (key == "n_tau") cfg.n_tau = detail::parse_int(full, v);
      else if (key == "n_omega") cfg.n_omega = detail::parse_int(full, v);
      else throw config_error("config: unknown key '" + full + "'");
    } else if (section == "semigroup") {
      if (key == "C") cfg.semigroup.C = detail::parse_number(full, v);
      else if (key == "delta_d") cfg.semigroup.delta_d = detail::parse_number(full, v);
      else if (key == "cn_steps_per_unit_time")
        cfg.semigroup.cn_steps_per_unit_time = detail::parse_int(full, v);
      else if (key == "theta_scheme") cfg.semigroup.theta_scheme = detail::parse_number(full, v);
      else throw config_error("config: unknown key '" + full + "'");
    } else if (section == "solver") {
      if (key == "p") cfg.solver.p = detail::parse_number(full, v);
      else if (key == "rho") cfg.solver.rho = detail::parse_number(full, v);
      else if (key == "dt") cfg.solver.dt = detail::parse_number(full, v);
      else if (key == "t_max") cfg.solver.t_max = detail::parse_number(full, v);
      else if (key == "picard_tol") cfg.solver.picard_tol = detail::parse_number(full, v);
      else if (key == "max_iters") cfg.solver.max_iters = detail::parse_int(full, v);
      else throw config_error("config: unknown key '" + full + "'");
    } else if (section == "forcing") {
      const auto dot2 = key.find('.');
      if (dot2 == std::string::npos)
        throw config_error("config: forcing keys are '<profile>.<param>', got '" + full + "'");
      const std::string name = key.substr(0, dot2);
      const std::string param = key.substr(dot2 + 1);
      if (std::find(profile_names.begin(), profile_names.end(), name) == profile_names.end())
        throw config_error("config: unknown forcing profile '" + full + "'");
      detail::apply_profile_key(cfg.profiles[name], full, param, v);
    } else if (section == "experiment") {
      if (key == "seed") {
        const double x = detail::parse_number(full, v);
        if (x < 0) throw config_error("config: key '" + full + "' must be nonnegative");
        cfg.seed = static_cast<uint64_t>(x);
      } else if (key == "output_dir") {
        cfg.output_dir = v;
      } else {
        throw config_error("config: unknown key '" + full + "'");
      }
    } else {
      throw config_error("config: unknown section '" + section + "'");
    }
  }
  if (kv.find("semigroup.delta_d") == kv.end())
    cfg.semigroup.delta_d = 0.25 * (cfg.d - 1) * (cfg.d - 1);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path,
                                    const std::vector<std::string>& overrides = {}) {
  ConfigMap kv = parse_config_file(path);
  for (const auto& o : overrides) apply_override(kv, o);
  return materialize_config(kv);
}

}  // namespace hypbq
