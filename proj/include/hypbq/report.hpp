#pragma once

// Artifact writers: report.json with stable key order, CSV time series.

#include "hypbq/config.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>

namespace hypbq {

using ordered_json = nlohmann::ordered_json;

inline std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline ordered_json config_echo(const ExperimentConfig& cfg) {
  ordered_json j;
  j["manifold"] = {{"d", cfg.d},
                   {"tau_max", cfg.tau_max},
                   {"n_tau", cfg.n_tau},
                   {"n_omega", cfg.n_omega}};
  j["semigroup"] = {{"C", cfg.semigroup.C},
                    {"delta_d", cfg.semigroup.delta_d},
                    {"cn_steps_per_unit_time", cfg.semigroup.cn_steps_per_unit_time},
                    {"theta_scheme", cfg.semigroup.theta_scheme}};
  j["solver"] = {{"p", cfg.solver.p},
                 {"rho", cfg.solver.rho},
                 {"dt", cfg.solver.dt},
                 {"t_max", cfg.solver.t_max},
                 {"picard_tol", cfg.solver.picard_tol},
                 {"max_iters", cfg.solver.max_iters}};
  ordered_json fj = ordered_json::object();
  for (const auto& [name, p] : cfg.profiles) {
    ordered_json pj;
    pj["amplitude"] = p.amplitude;
    pj["center_tau"] = p.center_tau;
    pj["width"] = p.width;
    pj["angular_mode"] = p.angular_mode;
    pj["modulation"] = p.modulation == BumpProfile::Mod::cosine ? "cosine" : "constant";
    if (p.modulation == BumpProfile::Mod::cosine) {
      pj["period"] = p.period;
      pj["phase"] = p.phase;
    }
    fj[name] = pj;
  }
  j["forcing"] = fj;
  j["experiment"] = {{"seed", cfg.seed}, {"output_dir", cfg.output_dir}};
  return j;
}

inline ordered_json smallness_json(const SmallnessReport& rep) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : rep.conditions)
    arr.push_back({{"condition", c.name},
                   {"lhs", c.lhs},
                   {"rhs", c.rhs},
                   {"pass", c.pass},
                   {"margin", c.margin}});
  return {{"conditions", arr}, {"all_pass", rep.all_pass}};
}

inline ordered_json iteration_json(const IterationReport& rep) {
  ordered_json j;
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  j["diverged"] = rep.diverged;
  j["sup_norms"] = rep.sup_norms;
  j["diffs"] = rep.diffs;
  j["ratios"] = rep.ratios;
  if (std::isfinite(rep.contraction_ratio)) j["contraction_ratio"] = rep.contraction_ratio;
  if (std::isfinite(rep.ratio_spread)) j["ratio_spread"] = rep.ratio_spread;
  j["ratio_stable"] = rep.ratio_stable;
  if (std::isfinite(rep.final_residual)) j["final_residual"] = rep.final_residual;
  return j;
}

inline void write_report(const std::filesystem::path& dir, const ordered_json& body) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "report.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "report.json").string());
  out << body.dump(2) << "\n";
}

inline void write_csv(const std::filesystem::path& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  for (size_t c = 0; c < header.size(); ++c)
    out << header[c] << (c + 1 < header.size() ? "," : "\n");
  const size_t rows = columns.empty() ? 0 : columns.front().size();
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < columns.size(); ++c)
      out << columns[c][r] << (c + 1 < columns.size() ? "," : "\n");
}

}  // namespace hypbq
