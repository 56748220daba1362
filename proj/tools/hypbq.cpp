// hypbq driver: batch experiment runner over the hyperbolic Boussinesq stack.
//
// Subcommands: simulate, verify-semigroup, stability, periodic, constants.
// Each run writes <out>/report.json (stable key order; the timestamp is the
// only field that varies between identical runs) plus CSV series for plotting.
// Exit status: 0 all checks pass, 2 a check failed, 1 error.

#include "hypbq/config.hpp"
#include "hypbq/duhamel.hpp"
#include "hypbq/periodic.hpp"
#include "hypbq/picard.hpp"
#include "hypbq/report.hpp"
#include "hypbq/stability.hpp"

#include <CLI11.hpp>

#include <cstdarg>
#include <cstdio>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

namespace {

using namespace hypbq;

constexpr const char* kVersion = "0.1.0";
const double kInf = std::numeric_limits<double>::infinity();

struct Engine {
  ManifoldGrid grid;
  DiffOps ops;
  Projector proj;
  SemigroupOp sg;
  DuhamelIntegrator duh;

  explicit Engine(const ExperimentConfig& cfg)
      : grid(cfg.make_grid()),
        ops(grid),
        proj(ops),
        sg(ops, cfg.semigroup),
        duh(ops, proj, sg, cfg.solver.p, cfg.solver.dt) {}
};

TheoremConstants formula_constants(const ExperimentConfig& cfg) {
  const double p = cfg.solver.p;
  const double dd = cfg.semigroup.delta_d;
  const double beta = gamma_pq(p / 3.0, p, dd);
  const double beta_tilde = 0.5 * (gamma_pq(p, p, dd) + gamma_pq(0.5 * p, p, dd));
  TheoremConstants k;
  k.C = cfg.semigroup.C;
  k.N = bound_N(cfg.semigroup.C, p, beta, cfg.d);
  k.M = bound_M(cfg.semigroup.C, p, cfg.d, beta_tilde);
  return k;
}

// One pass/fail entry: pass iff value <= threshold.
struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

Check make_check(const std::string& name, double value, double threshold) {
  return {name, value, threshold, value <= threshold};
}

ordered_json checks_json(const std::vector<Check>& checks, bool& all_pass) {
  ordered_json arr = ordered_json::array();
  all_pass = true;
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"value", c.value},
                   {"threshold", c.threshold},
                   {"pass", c.pass}});
    all_pass = all_pass && c.pass;
  }
  return arr;
}

ordered_json report_envelope(const std::string& command) {
  ordered_json j;
  j["command"] = command;
  j["versions"] = {{"hypbq", kVersion}};
  j["timestamp"] = iso_timestamp();
  return j;
}

std::filesystem::path out_dir(const ExperimentConfig& cfg, const std::string& out_flag) {
  return out_flag.empty() ? std::filesystem::path(cfg.output_dir)
                          : std::filesystem::path(out_flag);
}

int finish(const std::filesystem::path& dir, ordered_json& body,
           const std::vector<Check>& checks) {
  bool all_pass = true;
  body["checks"] = checks_json(checks, all_pass);
  body["pass"] = all_pass;
  write_report(dir, body);
  for (const auto& c : checks)
    if (!c.pass)
      std::cerr << "check failed: " << c.name << " (value " << c.value
                << " > threshold " << c.threshold << ")\n";
  std::cout << (all_pass ? "PASS" : "FAIL") << "  report: "
            << (dir / "report.json").string() << "\n";
  return all_pass ? 0 : 2;
}

// ---------------------------------------------------------------------------
// simulate

int run_simulate(const ExperimentConfig& cfg, const std::string& out_flag) {
  Engine eng(cfg);
  const double p = cfg.solver.p;
  ProblemData data = cfg.make_problem(eng.grid);
  TheoremConstants consts = formula_constants(cfg);
  DataNorms norms = measure_data_norms(data, cfg.solver);
  SmallnessReport smallness = smallness_check(norms, consts, cfg.solver);
  if (!smallness.all_pass)
    std::cerr << "warning: smallness hypotheses not all satisfied at formula constants\n";

  PicardResult pr = picard_solve(data, eng.duh, cfg.solver);

  const int n_nodes = pr.traj.n_nodes();
  std::vector<double> ts(n_nodes), u_lp(n_nodes), th_lp(n_nodes), prod(n_nodes),
      div_abs(n_nodes);
  double sup_prod = 0.0, div_rel = 0.0;
  for (int n = 0; n < n_nodes; ++n) {
    const State& s = pr.traj.states[n];
    ts[n] = pr.traj.time(n);
    u_lp[n] = lp_norm(s.u, p);
    th_lp[n] = lp_norm(s.theta, p);
    prod[n] = product_norm(s, p);
    div_abs[n] = lp_norm(eng.ops.div_vector(s.u), 2.0);
    const double u2 = lp_norm(s.u, 2.0);
    if (u2 > 0.0) div_rel = std::max(div_rel, div_abs[n] / u2);
    sup_prod = std::max(sup_prod, prod[n]);
  }

  const std::filesystem::path dir = out_dir(cfg, out_flag);
  write_csv(dir / "series" / "trajectory.csv",
            {"t", "u_lp", "theta_lp", "product_norm", "div_l2"},
            {ts, u_lp, th_lp, prod, div_abs});

  ordered_json body = report_envelope("simulate");
  body["config"] = config_echo(cfg);
  body["results"]["constants"] = {{"C", consts.C}, {"M", consts.M}, {"N", consts.N}};
  body["results"]["data_norms"] = {{"init", norms.init_norm},
                                   {"h", norms.h_norm},
                                   {"Ff", norms.ff_norm}};
  body["results"]["smallness"] = smallness_json(smallness);
  body["results"]["iterations"] = iteration_json(pr.report);
  body["results"]["trajectory"] = {{"n_nodes", n_nodes},
                                   {"dt", cfg.solver.dt},
                                   {"sup_product_norm", sup_prod},
                                   {"final_u_lp", u_lp.back()},
                                   {"final_theta_lp", th_lp.back()}};
  body["results"]["divergence_rel"] = div_rel;

  std::vector<Check> checks;
  checks.push_back({"picard_converged", pr.report.converged ? 0.0 : 1.0, 0.0,
                    pr.report.converged});
  const double resid = std::isfinite(pr.report.final_residual)
                           ? pr.report.final_residual
                           : kInf;
  checks.push_back(make_check("fixed_point_residual", resid,
                              10.0 * cfg.solver.picard_tol));
  checks.push_back(make_check("divergence_rel", div_rel, 1e-6));
  return finish(dir, body, checks);
}

// ---------------------------------------------------------------------------
// verify-semigroup

int run_verify_semigroup(const ExperimentConfig& cfg, const std::string& out_flag) {
  const int d = cfg.d;
  std::vector<Check> checks;
  ordered_json body = report_envelope("verify-semigroup");
  body["config"] = config_echo(cfg);
  ordered_json res;

  for (double t : {0.1, 1.0}) {
    const double mass = heat_kernel_mass(d, t);
    res["kernel_mass"][t == 0.1 ? "t_0.1" : "t_1.0"] = mass;
    checks.push_back(make_check(
        t == 0.1 ? "kernel_mass_t_0.1" : "kernel_mass_t_1.0", std::abs(mass - 1.0), 1e-6));
  }
  res["kernel_values"] = {{"p_1_at_0", heat_kernel_closed(d, 1.0, 0.0)},
                          {"p_1_at_1", heat_kernel_closed(d, 1.0, 1.0)}};

  // CN propagator against the exact kernel convolution on a refined radial grid.
  {
    const int n_ref = std::max(cfg.n_tau, 192);
    ManifoldGrid g = build_grid(d, cfg.tau_max, n_ref, d == 2 ? 4 : 1);
    DiffOps ops(g);
    SemigroupConfig sc = cfg.semigroup;
    sc.cn_steps_per_unit_time = std::max(sc.cn_steps_per_unit_time, 128);
    SemigroupOp sg(ops, sc);
    BumpProfile bp;
    bp.amplitude = 1.0;
    bp.center_tau = 1.5;
    bp.width = 0.4;
    ScalarField f0 = bp.scalar_field(g);
    ScalarField a = sg.apply_scalar(f0, 0.5);
    ScalarField b = scalar_semigroup_kernel_apply(f0, 0.5);
    ScalarField diff = a;
    diff.values -= b.values;
    const double rel = lp_norm(diff, 2.0) / lp_norm(b, 2.0);
    res["cn_vs_kernel"] = {{"n_tau", n_ref}, {"t", 0.5}, {"rel_l2", rel}};
    checks.push_back(make_check("cn_vs_kernel_rel_l2", rel, 1e-3));
  }

  // Dispersive slope: ||e^{tL}theta0||_inf / ||theta0||_1 should fall like
  // t^{-d/2} for small t over origin-centred bumps. Uses the exact kernel
  // (one matrix per time, applied to every sample profile).
  std::vector<double> slope_sample, slope_value;
  {
    ManifoldGrid g = build_grid(d, cfg.tau_max, 768, d == 2 ? 4 : 1);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> width(0.04, 0.055), amp(0.5, 1.5);
    const int n_samples = 20, n_times = 8;
    std::vector<Vec> profiles;
    std::vector<double> n1(n_samples);
    for (int s = 0; s < n_samples; ++s) {
      BumpProfile bp;
      bp.amplitude = amp(rng);
      bp.center_tau = 0.0;
      bp.width = width(rng);
      ScalarField th0 = bp.scalar_field(g);
      n1[s] = lp_norm(th0, 1.0);
      Vec fr(g.n_tau);
      for (int j = 0; j < g.n_tau; ++j) fr[j] = th0.values[g.idx(j, 0)];
      profiles.push_back(fr);
    }
    std::vector<double> log_t(n_times);
    std::vector<std::vector<double>> ratios(n_samples, std::vector<double>(n_times));
    for (int i = 0; i < n_times; ++i) {
      log_t[i] = std::log(0.01) + (std::log(0.1) - std::log(0.01)) * i / (n_times - 1);
      const double t = std::exp(log_t[i]);
      Eigen::MatrixXd K = (d == 3) ? detail::kernel_matrix_h3(g, t)
                                   : detail::kernel_matrix_h2(g, t);
      for (int s = 0; s < n_samples; ++s)
        ratios[s][i] = (K * profiles[s]).cwiseAbs().maxCoeff() / n1[s];
    }
    double worst_dev = 0.0;
    for (int s = 0; s < n_samples; ++s) {
      LogLinearFit fit = fit_loglinear(log_t, ratios[s], log_t.front() - 1e-9,
                                       log_t.back() + 1e-9, 0.0);
      slope_sample.push_back(s);
      slope_value.push_back(fit.slope);
      worst_dev = std::max(worst_dev, std::abs(fit.slope + 0.5 * d) / (0.5 * d));
    }
    res["dispersive_slope"] = {{"target", -0.5 * d},
                               {"samples", n_samples},
                               {"worst_rel_deviation", worst_dev}};
    checks.push_back(make_check("dispersive_slope_rel_dev", worst_dev, 0.10));
  }

  // Single-constant domination of the p=1 -> q=inf bound out to t = 5. The
  // constant is fitted on [0.05, 0.5] and must cover the tail with 5% slack.
  std::vector<double> dom_t, dom_ratio;
  {
    ManifoldGrid g = build_grid(d, 8.0, 512, d == 2 ? 4 : 1);
    std::mt19937_64 rng(cfg.seed + 1);
    std::uniform_real_distribution<double> width(0.06, 0.09), amp(0.5, 1.5);
    const int n_samples = 20, n_times = 20;
    std::vector<Vec> profiles;
    std::vector<double> n1(n_samples);
    for (int s = 0; s < n_samples; ++s) {
      BumpProfile bp;
      bp.amplitude = amp(rng);
      bp.center_tau = 0.0;
      bp.width = width(rng);
      ScalarField th0 = bp.scalar_field(g);
      n1[s] = lp_norm(th0, 1.0);
      Vec fr(g.n_tau);
      for (int j = 0; j < g.n_tau; ++j) fr[j] = th0.values[g.idx(j, 0)];
      profiles.push_back(fr);
    }
    std::vector<double> times(n_times);
    dom_ratio.assign(n_times, 0.0);
    for (int i = 0; i < n_times; ++i) {
      times[i] =
          std::exp(std::log(0.05) + (std::log(5.0) - std::log(0.05)) * i / (n_times - 1));
      Eigen::MatrixXd K = (d == 3) ? detail::kernel_matrix_h3(g, times[i])
                                   : detail::kernel_matrix_h2(g, times[i]);
      const double bound = dispersive_bound(1.0, kInf, times[i], cfg.semigroup, d);
      for (int s = 0; s < n_samples; ++s) {
        const double r =
            (K * profiles[s]).cwiseAbs().maxCoeff() / (bound * n1[s]);
        dom_ratio[i] = std::max(dom_ratio[i], r);
      }
    }
    dom_t = times;
    double K_fit = 0.0, late = 0.0;
    for (int i = 0; i < n_times; ++i) {
      if (times[i] <= 0.5) K_fit = std::max(K_fit, dom_ratio[i]);
      else late = std::max(late, dom_ratio[i]);
    }
    res["domination"] = {{"fitted_constant", K_fit},
                         {"late_over_fitted", late / K_fit}};
    checks.push_back(make_check("domination_late_over_fitted", late / K_fit, 1.05));
  }

  // Structure checks on the configured grid: exact zeroth-order factor and
  // L2 contractivity of the scalar semigroup.
  {
    Engine eng(cfg);
    std::mt19937_64 rng(cfg.seed + 2);
    VectorField v = random_smooth_vector(eng.grid, rng, 1.0);
    const double t = 0.37;
    VectorField a = eng.sg.apply_vector(v, t);
    VectorField b = eng.sg.apply_vector_no_zeroth(v, t);
    b.comps *= std::exp(-(d - 1) * t);
    VectorField diff = a;
    diff.comps -= b.comps;
    const double rel = lp_norm(diff, 2.0) / lp_norm(v, 2.0);
    res["zeroth_order_factor_rel"] = rel;
    checks.push_back(make_check("zeroth_order_factor", rel, 1e-10));

    ScalarField f = random_smooth_scalar(eng.grid, rng, 1.0);
    const double ratio = lp_norm(eng.sg.apply_scalar(f, 1.0), 2.0) / lp_norm(f, 2.0);
    res["scalar_l2_contraction_ratio"] = ratio;
    checks.push_back(make_check("scalar_l2_contractivity", ratio - 1.0, 1e-12));
  }

  const std::filesystem::path dir = out_dir(cfg, out_flag);
  write_csv(dir / "series" / "dispersive_slopes.csv", {"sample", "slope"},
            {slope_sample, slope_value});
  write_csv(dir / "series" / "domination.csv", {"t", "worst_ratio_to_bound"},
            {dom_t, dom_ratio});
  body["results"] = res;
  return finish(dir, body, checks);
}

// ---------------------------------------------------------------------------
// stability

int run_stability(const ExperimentConfig& cfg, const std::string& out_flag) {
  Engine eng(cfg);
  ProblemData data = cfg.make_problem(eng.grid);
  State pert = cfg.make_perturbation(eng.grid);
  if (product_norm(pert, 2.0) == 0.0)
    throw config_error("stability requires a nonzero du0 or dtheta0 profile");
  TheoremConstants consts = formula_constants(cfg);
  StabilityRates rates = stability_rates(cfg.solver.p, cfg.d, cfg.semigroup);

  const std::filesystem::path dir = out_dir(cfg, out_flag);
  ordered_json body = report_envelope("stability");
  body["config"] = config_echo(cfg);

  DecayReport rep;
  try {
    rep = perturbation_experiment(data, pert, eng.duh, cfg.solver, consts);
  } catch (const std::runtime_error& e) {
    std::cerr << e.what() << "\n";
    body["results"] = {{"error", e.what()}};
    body["pass"] = false;
    write_report(dir, body);
    return 2;
  }

  std::vector<double> env(rep.times.size());
  for (size_t i = 0; i < rep.times.size(); ++i)
    env[i] = rep.prefactor * std::exp(-rep.delta_measured * rep.times[i]);
  write_csv(dir / "series" / "decay.csv", {"t", "phi", "envelope"},
            {rep.times, rep.phi, env});

  ordered_json res;
  res["rates"] = {{"gamma", rates.gamma},
                  {"C_tilde", rates.C_tilde},
                  {"theta", rates.exps.theta},
                  {"theta_tilde", rates.exps.theta_tilde}};
  res["fit"] = {{"delta_measured", rep.delta_measured},
                {"prefactor", rep.prefactor},
                {"r_squared", rep.r_squared},
                {"envelope_pass", rep.envelope_pass}};
  res["theory"] = {{"feasible", rep.theory_feasible}};
  if (rep.theory_feasible) {
    res["theory"]["delta_bound"] = rep.delta_bound_theoretical;
    res["theory"]["c_delta"] = rep.c_delta_theoretical;
  }
  res["base_smallness_pass"] = rep.base_smallness_pass;
  res["perturbed_smallness_pass"] = rep.perturbed_smallness_pass;
  res["base_iterations"] = iteration_json(rep.base_iterations);
  res["perturbed_iterations"] = iteration_json(rep.perturbed_iterations);
  body["results"] = res;

  std::vector<Check> checks;
  checks.push_back({"delta_measured_positive", -rep.delta_measured, 0.0,
                    rep.delta_measured > 0.0});
  checks.push_back(make_check("fit_r_squared", 0.98 - rep.r_squared, 0.0));
  checks.push_back({"envelope_holds", rep.envelope_pass ? 0.0 : 1.0, 0.0,
                    rep.envelope_pass});
  return finish(dir, body, checks);
}

// ---------------------------------------------------------------------------
// periodic

int run_periodic(const ExperimentConfig& cfg, const std::string& out_flag) {
  Engine eng(cfg);
  ProblemData data = cfg.make_problem(eng.grid);
  TheoremConstants consts = formula_constants(cfg);
  PeriodicResult res = periodic_solve(data, eng.duh, cfg.solver, consts);

  const std::filesystem::path dir = out_dir(cfg, out_flag);
  std::vector<double> wn, wd, wr;
  for (size_t n = 0; n < res.d_norms.size(); ++n) {
    wn.push_back(static_cast<double>(n));
    wd.push_back(res.d_norms[n]);
    wr.push_back(n < res.ratios.size() ? res.ratios[n]
                                       : std::numeric_limits<double>::quiet_NaN());
  }
  write_csv(dir / "series" / "windows.csv", {"window", "d_n", "ratio"}, {wn, wd, wr});

  const double p = cfg.solver.p;
  std::vector<double> ot, ou, oth, op;
  for (int n = 0; n < res.orbit.n_nodes(); ++n) {
    ot.push_back(res.orbit.time(n));
    ou.push_back(lp_norm(res.orbit.states[n].u, p));
    oth.push_back(lp_norm(res.orbit.states[n].theta, p));
    op.push_back(product_norm(res.orbit.states[n], p));
  }
  write_csv(dir / "series" / "orbit.csv", {"t", "u_lp", "theta_lp", "product_norm"},
            {ot, ou, oth, op});

  ordered_json body = report_envelope("periodic");
  body["config"] = config_echo(cfg);
  ordered_json rj;
  rj["period"] = *data.forcing.period;
  rj["n_windows"] = res.n_windows;
  rj["refinement_passes"] = res.refinement_passes;
  rj["d_norms"] = res.d_norms;
  rj["ratios"] = res.ratios;
  rj["cauchy"] = {{"ratio_defined", res.cauchy.ratio_defined},
                  {"contracting", res.cauchy.contracting}};
  if (res.cauchy.ratio_defined) rj["cauchy"]["ratio"] = res.cauchy.ratio;
  rj["orbit_sup"] = res.orbit_sup;
  rj["defect"] = res.defect;
  rj["defect_rel"] = res.defect_rel;
  rj["smallness"] = smallness_json(res.smallness);
  body["results"] = rj;

  std::vector<Check> checks;
  checks.push_back({"window_iteration_converged", res.converged ? 0.0 : 1.0, 0.0,
                    res.converged});
  checks.push_back({"geometric_decay", res.geometric_ok ? 0.0 : 1.0, 0.0,
                    res.geometric_ok});
  checks.push_back(make_check("periodicity_defect_rel", res.defect_rel, 1e-4));
  return finish(dir, body, checks);
}

// ---------------------------------------------------------------------------
// constants

struct ConstantArgs {
  int d = 2;
  double p = 4.0;
  double delta_d = 1.0;
  double C = 1.0;
  double rho = 0.0;
  double h_norm = 0.0;
};

int run_constants(const ConstantArgs& a, const std::string& out_flag) {
  if (a.d != 2 && a.d != 3) throw config_error("constants: d must be 2 or 3");
  if (!(a.p > a.d)) throw config_error("constants: requires p > d");
  if (!(a.delta_d > 0.0)) throw config_error("constants: delta_d must be positive");
  if (!(a.C >= 1.0)) throw config_error("constants: C must be >= 1");

  const double beta = gamma_pq(a.p / 3.0, a.p, a.delta_d);
  const double beta_tilde =
      0.5 * (gamma_pq(a.p, a.p, a.delta_d) + gamma_pq(0.5 * a.p, a.p, a.delta_d));
  const double N = bound_N(a.C, a.p, beta, a.d);
  const double M = bound_M(a.C, a.p, a.d, beta_tilde);
  SemigroupConfig sc;
  sc.C = a.C;
  sc.delta_d = a.delta_d;
  StabilityRates rates = stability_rates(a.p, a.d, sc);

  ordered_json body = report_envelope("constants");
  body["parameters"] = {{"d", a.d},     {"p", a.p},         {"delta_d", a.delta_d},
                        {"C", a.C},     {"rho", a.rho},     {"h_norm", a.h_norm}};
  ordered_json res;
  res["theta"] = static_cast<double>(a.d) / a.p;
  res["theta_tilde"] = 0.5 * a.d * (1.0 / a.p + 1.0 / a.d);
  res["beta"] = beta;
  res["beta_tilde"] = beta_tilde;
  res["N"] = N;
  res["M"] = M;
  res["M_bilinear"] = M;
  res["M_forcing"] = M;
  res["near_critical"] = near_critical(a.p, a.d);
  res["gamma"] = rates.gamma;
  res["C_tilde"] = rates.C_tilde;
  res["smallness"] = {
      {"2*M*rho + N*h < 1", 2.0 * M * a.rho + N * a.h_norm < 1.0},
      {"rho < 1/(4M)", a.rho < 1.0 / (4.0 * M)},
      {"h < 1/(3N)", a.h_norm < 1.0 / (3.0 * N)}};
  if (a.rho > 0.0 || a.h_norm > 0.0) {
    try {
      const double db = delta_bound(rates.gamma, a.rho, rates.C_tilde,
                                    rates.exps.theta, rates.exps.theta_tilde, a.h_norm);
      res["delta_bound"] = db;
      res["delta_feasible"] = db > 0.0;
      if (db > 0.0) {
        ConeExponents exps{rates.exps.theta, rates.exps.theta_tilde};
        res["c_delta_at_half_bound"] =
            c_delta(M, a.rho, rates.C_tilde, rates.gamma, 0.5 * db, a.h_norm, exps);
      }
    } catch (const std::domain_error& e) {
      res["delta_feasible"] = false;
      res["delta_bound_error"] = e.what();
    }
  }
  body["results"] = res;

  const std::filesystem::path dir =
      out_flag.empty() ? std::filesystem::path("out") : std::filesystem::path(out_flag);
  write_report(dir, body);
  std::cout << body["results"].dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypbq: Boussinesq flows on real hyperbolic space"};
  app.require_subcommand(1);

  std::string config_path, out_flag;
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "experiment config file");
    if (config_required) opt->required();
    sub->add_option("--out", out_flag, "output directory (overrides config)");
    sub->add_option("--override", overrides,
                    "section.key=value config override (repeatable)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "run the Picard fixed-point solver");
  add_common(sim, true);
  CLI::App* ver =
      app.add_subcommand("verify-semigroup", "heat-kernel and dispersive-bound suite");
  add_common(ver, true);
  CLI::App* sta =
      app.add_subcommand("stability", "perturbation-decay experiment");
  add_common(sta, true);
  CLI::App* per =
      app.add_subcommand("periodic", "time-periodic orbit extraction");
  add_common(per, true);

  CLI::App* con = app.add_subcommand("constants", "evaluate theorem constants");
  ConstantArgs cargs;
  add_common(con, false);
  con->add_option("--d", cargs.d, "dimension (2 or 3)");
  con->add_option("--p", cargs.p, "integrability exponent");
  con->add_option("--delta-d", cargs.delta_d, "spectral-gap fraction delta_d");
  con->add_option("--C", cargs.C, "semigroup constant C");
  con->add_option("--rho", cargs.rho, "fixed-point radius rho");
  con->add_option("--h-norm", cargs.h_norm, "sup-in-time norm of the coupling h");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (con->parsed()) {
      if (!config_path.empty()) {
        ExperimentConfig cfg = load_config(config_path, overrides);
        if (con->count("--d") == 0) cargs.d = cfg.d;
        if (con->count("--p") == 0) cargs.p = cfg.solver.p;
        if (con->count("--delta-d") == 0) cargs.delta_d = cfg.semigroup.delta_d;
        if (con->count("--C") == 0) cargs.C = cfg.semigroup.C;
        if (con->count("--rho") == 0) cargs.rho = cfg.solver.rho;
        if (out_flag.empty()) out_flag = cfg.output_dir;
      }
      return run_constants(cargs, out_flag);
    }
    ExperimentConfig cfg = load_config(config_path, overrides);
    if (sim->parsed()) return run_simulate(cfg, out_flag);
    if (ver->parsed()) return run_verify_semigroup(cfg, out_flag);
    if (sta->parsed()) return run_stability(cfg, out_flag);
    if (per->parsed()) return run_periodic(cfg, out_flag);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
