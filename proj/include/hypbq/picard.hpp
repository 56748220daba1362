#pragma once

// Picard iteration for the nonlinear mild formulation, the smallness
// conditions of the fixed-point argument, and fitted discrete analogues of
// the estimate constants.

#include "hypbq/duhamel.hpp"

#include <iostream>
#include <limits>

namespace hypbq {

struct SolverConfig {
  double p = 4.0;
  double rho = 0.01;
  double dt = 1.0 / 64.0;
  double t_max = 10.0;
  double picard_tol = 1e-10;
  int max_iters = 15;

  void validate(int d) const {
    if (!(p > d)) throw std::invalid_argument("SolverConfig: p must exceed d");
    if (!(rho > 0.0)) throw std::invalid_argument("SolverConfig: rho must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("SolverConfig: dt must be positive");
    if (!(t_max >= dt)) throw std::invalid_argument("SolverConfig: t_max must be >= dt");
    if (!(picard_tol > 0.0))
      throw std::invalid_argument("SolverConfig: picard_tol must be positive");
    if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
  }

  int n_nodes() const { return static_cast<int>(std::lround(t_max / dt)) + 1; }
};

struct ProblemData {
  State init;
  ForcingSet forcing;
};

struct IterationReport {
  std::vector<double> sup_norms;
  std::vector<double> diffs;
  std::vector<double> ratios;
  double contraction_ratio = std::numeric_limits<double>::quiet_NaN();
  double ratio_spread = std::numeric_limits<double>::quiet_NaN();
  bool ratio_stable = false;
  bool converged = false;
  bool diverged = false;
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
};

// One application of the fixed-point map:
// Phi(v) = e^{-tA}(u0,theta0) + B(v,v) + T_h(v.theta) + T(F,f).
inline Trajectory phi_map(const Trajectory& v, const ProblemData& data,
                          const DuhamelIntegrator& duh, const SolverConfig& cfg) {
  const int N = v.n_nodes();
  const double sup = v.sup_product_norm(cfg.p);
  if (sup > cfg.rho * (1.0 + 1e-12))
    std::cerr << "phi_map: input trajectory leaves the radius-" << cfg.rho
              << " ball (sup " << sup << ")\n";

  auto lin = duh.semigroup_series(data.init, N);
  auto q_sing = [&](int n) {
    return duh.bilinear_integrand(v.states[n], v.states[n]) +
           duh.forcing_integrand(data.forcing.F_at(n * duh.dt()),
                                 data.forcing.f_at(n * duh.dt()));
  };
  auto bt = duh.integrate(q_sing, N, true);
  auto q_coup = [&](int n) {
    return duh.coupling_integrand(v.states[n].theta, data.forcing.h_at(n * duh.dt()));
  };
  auto th = duh.integrate(q_coup, N, false);

  Trajectory out{v.grid, v.dt, {}};
  out.states.reserve(N);
  for (int n = 0; n < N; ++n) {
    State s = lin[n] + bt[n] + th[n];
    s.t = n * v.dt;
    out.states.push_back(std::move(s));
  }
  return out;
}

struct PicardResult {
  Trajectory traj;
  IterationReport report;
};

inline double sup_diff_norm(const Trajectory& a, const Trajectory& b, double p) {
  check_compatible(a, b);
  double m = 0.0;
  for (int n = 0; n < a.n_nodes(); ++n)
    m = std::max(m, product_norm(a.states[n] - b.states[n], p));
  return m;
}

inline PicardResult picard_solve(const ProblemData& data, const DuhamelIntegrator& duh,
                                 const SolverConfig& cfg,
                                 const Trajectory* start = nullptr) {
  cfg.validate(duh.grid().d);
  const int N = cfg.n_nodes();
  if (start && (start->grid != &duh.grid() || start->n_nodes() != N ||
                std::abs(start->dt - cfg.dt) > 1e-15))
    throw std::invalid_argument("picard_solve: start trajectory has mismatched time nodes");
  Trajectory v = start ? *start : Trajectory::zero(duh.grid(), cfg.dt, N);
  PicardResult r;
  IterationReport& rep = r.report;

  for (int k = 0; k < cfg.max_iters; ++k) {
    Trajectory next = phi_map(v, data, duh, cfg);
    const double diff = sup_diff_norm(next, v, cfg.p);
    const double sup = next.sup_product_norm(cfg.p);
    rep.diffs.push_back(diff);
    rep.sup_norms.push_back(sup);
    rep.iterations = k + 1;
    v = std::move(next);
    if (!std::isfinite(diff) || !std::isfinite(sup)) {
      rep.diverged = true;
      break;
    }
    if (diff < cfg.picard_tol) {
      rep.converged = true;
      break;
    }
  }

  for (size_t k = 0; k + 1 < rep.diffs.size(); ++k)
    rep.ratios.push_back(rep.diffs[k] > 0.0 ? rep.diffs[k + 1] / rep.diffs[k]
                                            : std::numeric_limits<double>::quiet_NaN());

  // Contraction measured where differences sit above the floating-point
  // floor of the iteration, skipping the first two transients.
  const double scale = rep.sup_norms.empty() ? 0.0 : rep.sup_norms.front();
  const double floor = 100.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  int n_window = 0;
  for (size_t k = 2; k < rep.ratios.size(); ++k) {
    if (!(rep.diffs[k] > floor) || !(rep.diffs[k + 1] > floor)) continue;
    if (!std::isfinite(rep.ratios[k])) continue;
    rmin = std::min(rmin, rep.ratios[k]);
    rmax = std::max(rmax, rep.ratios[k]);
    ++n_window;
  }
  if (n_window > 0) {
    rep.contraction_ratio = rmax;
    rep.ratio_spread = rmax / rmin - 1.0;
    rep.ratio_stable = rep.ratio_spread <= 0.10;
  } else if (!rep.ratios.empty()) {
    rep.contraction_ratio = rep.ratios.back();
  }

  if (rep.converged) {
    Trajectory check = phi_map(v, data, duh, cfg);
    rep.final_residual = sup_diff_norm(check, v, cfg.p);
  } else if (!rep.diverged && !rep.ratios.empty() &&
             std::isfinite(rep.ratios.back()) && rep.ratios.back() >= 1.0) {
    rep.diverged = true;
  }

  r.traj = std::move(v);
  return r;
}

struct SmallnessCondition {
  std::string name;
  double lhs = 0.0, rhs = 0.0;
  bool pass = false;
  double margin = 0.0;  // rhs - lhs
};

struct SmallnessReport {
  std::vector<SmallnessCondition> conditions;
  bool all_pass = true;

  void add(const std::string& name, double lhs, double rhs) {
    SmallnessCondition c{name, lhs, rhs, lhs < rhs, rhs - lhs};
    all_pass = all_pass && c.pass;
    conditions.push_back(std::move(c));
  }
};

struct DataNorms {
  double init_norm = 0.0;  // ||(u0, theta0)||_{L^p x L^p}
  double h_norm = 0.0;     // sup_t ||h||_{L^{p/2}}
  double ff_norm = 0.0;    // sup_t max(||F||, ||f||)_{L^{p/2}}
};

struct TheoremConstants {
  double C = 1.0, M = 0.0, N = 0.0;
};

inline DataNorms measure_data_norms(const ProblemData& data, const SolverConfig& cfg) {
  DataNorms n;
  n.init_norm = product_norm(data.init, cfg.p);
  const int N = cfg.n_nodes();
  n.h_norm = forcing_h_norm(data.forcing, cfg.p, cfg.dt, N);
  n.ff_norm = forcing_ff_norm(data.forcing, cfg.p, cfg.dt, N);
  return n;
}

inline SmallnessReport smallness_check(const DataNorms& norms,
                                       const TheoremConstants& k,
                                       const SolverConfig& cfg,
                                       bool periodic = false) {
  SmallnessReport rep;
  rep.add("2*M*rho + N*||h|| < 1", 2.0 * k.M * cfg.rho + k.N * norms.h_norm, 1.0);
  rep.add("rho < 1/(4M)", cfg.rho, 1.0 / (4.0 * k.M));
  rep.add("||(u0,theta0)|| < rho/(3C)", norms.init_norm, cfg.rho / (3.0 * k.C));
  rep.add("||h|| < 1/(3N)", norms.h_norm, 1.0 / (3.0 * k.N));
  rep.add("||(F,f)|| < rho/(3M) - rho^2", norms.ff_norm,
          cfg.rho / (3.0 * k.M) - cfg.rho * cfg.rho);
  if (periodic)
    rep.add("||(u0,theta0)|| <= rho/(3C^2)", norms.init_norm,
            cfg.rho / (3.0 * k.C * k.C));
  return rep;
}

// Fitted discrete analogues of the estimate constants: worst observed ratio
// over a random smooth suite.
struct FittedConstants {
  double C_fit = 0.0;         // semigroup: sup_t ||e^{-tA}x|| / ||x||
  double N_fit = 0.0;         // coupling:  sup_t ||T_h eta|| / (||h|| ||eta||)
  double M_bilinear = 0.0;    // bilinear:  sup_t ||B(v,w)|| / (||v|| ||w||)
  double M_forcing = 0.0;     // forcing:   sup_t ||T(F,f)|| / ||(F,f)||
  int samples = 0;
};

inline FittedConstants fit_constants(const DuhamelIntegrator& duh, std::mt19937_64& rng,
                                     int n_samples, int n_nodes) {
  const ManifoldGrid& g = duh.grid();
  const double p = duh.p();
  FittedConstants fc;
  fc.samples = n_samples;
  for (int s = 0; s < n_samples; ++s) {
    // Semigroup constant.
    State x0{random_smooth_vector(g, rng, 1.0), random_smooth_scalar(g, rng, 1.0), 0.0};
    x0.u = duh.projector().leray_project(x0.u);
    auto lin = duh.semigroup_series(x0, n_nodes);
    const double x0n = product_norm(lin.front(), p);
    for (const State& st : lin)
      if (x0n > 0.0) fc.C_fit = std::max(fc.C_fit, product_norm(st, p) / x0n);

    // Coupling constant: random eta trajectory against a random h field.
    BumpProfile hp;
    hp.amplitude = 1.0;
    hp.center_tau = 0.3 * g.tau_max;
    hp.width = 0.8;
    ForcingSet fs = ForcingSet::build(g, hp, BumpProfile{}, BumpProfile{});
    fs.h_base = random_smooth_vector(g, rng, 1.0);
    std::vector<ScalarField> eta;
    ScalarField e0 = random_smooth_scalar(g, rng, 1.0);
    double eta_norm = 0.0;
    for (int n = 0; n < n_nodes; ++n) {
      ScalarField en = e0;
      en.values *= std::exp(-0.3 * n * duh.dt());
      eta_norm = std::max(eta_norm, lp_norm(en, p));
      eta.push_back(std::move(en));
    }
    auto th = duh.op_Th_series(eta, fs, n_nodes);
    const double h_n = lp_norm(fs.h_base, 0.5 * p);
    for (const State& st : th)
      if (h_n * eta_norm > 0.0)
        fc.N_fit = std::max(fc.N_fit, product_norm(st, p) / (h_n * eta_norm));

    // Bilinear constant.
    Trajectory v = Trajectory::zero(g, duh.dt(), n_nodes);
    Trajectory w = Trajectory::zero(g, duh.dt(), n_nodes);
    State sv{random_smooth_vector(g, rng, 1.0), random_smooth_scalar(g, rng, 1.0), 0.0};
    State sw{random_smooth_vector(g, rng, 1.0), random_smooth_scalar(g, rng, 1.0), 0.0};
    sv.u = duh.projector().leray_project(sv.u);
    sw.u = duh.projector().leray_project(sw.u);
    for (int n = 0; n < n_nodes; ++n) {
      const double a = std::exp(-0.2 * n * duh.dt());
      v.states[n] = a * sv;
      w.states[n] = a * sw;
      v.states[n].t = w.states[n].t = n * duh.dt();
    }
    auto bb = duh.op_B_series(v, w, n_nodes);
    const double vn = v.sup_product_norm(p), wn = w.sup_product_norm(p);
    for (const State& st : bb)
      if (vn * wn > 0.0)
        fc.M_bilinear = std::max(fc.M_bilinear, product_norm(st, p) / (vn * wn));

    // Forcing constant.
    ForcingSet ff = ForcingSet::zero(g);
    ff.F_base = random_smooth_tensor(g, rng, 1.0);
    ff.f_base = random_smooth_vector(g, rng, 1.0);
    ff.F_profile.amplitude = 1.0;
    ff.f_profile.amplitude = 1.0;
    auto tf = duh.op_T_forcing_series(ff, n_nodes);
    const double ffn = std::max(lp_norm(ff.F_base, 0.5 * p), lp_norm(ff.f_base, 0.5 * p));
    for (const State& st : tf)
      if (ffn > 0.0)
        fc.M_forcing = std::max(fc.M_forcing, product_norm(st, p) / ffn);
  }
  return fc;
}

}  // namespace hypbq
