#pragma once

// Exponential stability machinery: the closed-form decay-rate bound, cone
// operator norms, a discrete Volterra comparison solver, and the
// perturbation-decay experiment.

#include "hypbq/picard.hpp"

#include <algorithm>
#include <numeric>

namespace hypbq {

// delta < min{ gamma/2,
//              gamma - (4 rho C~ gamma G(1-th~) / (gamma - 8 rho C~))^{1-th~},
//              gamma - (gamma C~ ||h|| G(1-th) / (gamma - 2 C~ ||h||))^{1-th} }
// Returns the supremum of admissible delta; may be <= 0 when the smallness
// margin is thin (caller flags), throws when a denominator dies.
inline double delta_bound(double gamma, double rho, double C_tilde, double theta_exp,
                          double theta_tilde_exp, double h_norm) {
  if (!(gamma > 0.0)) throw std::invalid_argument("delta_bound: gamma must be positive");
  if (!(theta_exp > 0.0 && theta_exp < 1.0 && theta_tilde_exp > 0.0 && theta_tilde_exp < 1.0))
    throw std::invalid_argument("delta_bound: exponents must lie in (0,1)");
  double best = 0.5 * gamma;
  const double den2 = gamma - 8.0 * rho * C_tilde;
  if (!(den2 > 0.0))
    throw std::domain_error("delta_bound: gamma - 8*rho*C_tilde <= 0 (smallness violated)");
  const double x2 = 4.0 * rho * C_tilde * gamma * gamma_fn(1.0 - theta_tilde_exp) / den2;
  best = std::min(best, gamma - std::pow(x2, 1.0 - theta_tilde_exp));
  const double den3 = gamma - 2.0 * C_tilde * h_norm;
  if (!(den3 > 0.0))
    throw std::domain_error("delta_bound: gamma - 2*C_tilde*||h|| <= 0 (smallness violated)");
  const double x3 = gamma * C_tilde * h_norm * gamma_fn(1.0 - theta_exp) / den3;
  best = std::min(best, gamma - std::pow(x3, 1.0 - theta_exp));
  return best;
}

enum class ConeKind { A, D };

// ||A|| <= 2 rho C~ (g^{th~-1} G(1-th~) + 1/g) + C~ ||h|| (g^{th-1} G(1-th) + 1/g);
// ||D|| uses g - delta in the powers and 2/g in the tails.
inline double cone_operator_norm(ConeKind kind, double gamma, double delta, double rho,
                                 double C_tilde, double h_norm, const ConeExponents& e) {
  if (!(e.theta > 0.0 && e.theta < 1.0 && e.theta_tilde > 0.0 && e.theta_tilde < 1.0))
    throw std::invalid_argument("cone_operator_norm: exponents must lie in (0,1)");
  if (!(gamma > 0.0)) throw std::invalid_argument("cone_operator_norm: gamma must be positive");
  double rate = gamma, tail = 1.0 / gamma;
  if (kind == ConeKind::D) {
    if (!(delta >= 0.0 && delta < gamma))
      throw std::invalid_argument("cone_operator_norm: requires 0 <= delta < gamma");
    rate = gamma - delta;
    tail = 2.0 / gamma;
  }
  return 2.0 * rho * C_tilde *
             (std::pow(rate, e.theta_tilde - 1.0) * gamma_fn(1.0 - e.theta_tilde) + tail) +
         C_tilde * h_norm *
             (std::pow(rate, e.theta - 1.0) * gamma_fn(1.0 - e.theta) + tail);
}

// K(s) = sum_i lambda_i s^{-e_i} e^{-gamma s}, exponents e_i in [0, 1).
struct VolterraKernel {
  struct Term {
    double lambda = 0.0;
    double exponent = 0.0;
  };
  std::vector<Term> terms;
  double gamma = 0.0;
};

namespace detail {

// Moments int_a^b s^{k - e} e^{-g s} ds for k = 0, 1.
inline std::array<double, 2> kernel_moments(double e, double g, double a, double b) {
  if (g == 0.0) {
    return {(std::pow(b, 1.0 - e) - std::pow(a, 1.0 - e)) / (1.0 - e),
            (std::pow(b, 2.0 - e) - std::pow(a, 2.0 - e)) / (2.0 - e)};
  }
  if (e == 0.0) {
    const double m0 = (std::exp(-g * a) - std::exp(-g * b)) / g;
    const double m1 = (a * std::exp(-g * a) - b * std::exp(-g * b)) / g + m0 / g;
    return {m0, m1};
  }
  const double m0 = std::pow(g, e - 1.0) * (lower_incomplete_gamma(1.0 - e, g * b) -
                                            lower_incomplete_gamma(1.0 - e, g * a));
  const double m1 = std::pow(g, e - 2.0) * (lower_incomplete_gamma(2.0 - e, g * b) -
                                            lower_incomplete_gamma(2.0 - e, g * a));
  return {m0, m1};
}

}  // namespace detail

// Forward solve of psi = A psi + z with (A psi)(t_n) = int_0^{t_n} K(s)
// psi(t_n - s) ds, linear interpolation of psi on each panel. Row weights:
// psi_{n-m} takes near_m + far_{m-1} (near_0 alone at m = 0, far_{n-1} alone
// at m = n). Refuses when the quadrature row-sum norm reaches 1.
inline std::vector<double> volterra_solve(const VolterraKernel& kernel,
                                          const std::vector<double>& z, double dt) {
  if (kernel.gamma < 0.0)
    throw std::invalid_argument("volterra_solve: gamma must be >= 0");
  for (const auto& term : kernel.terms)
    if (term.exponent < 0.0 || term.exponent >= 1.0)
      throw std::invalid_argument("volterra_solve: exponents must lie in [0, 1)");
  const int N = static_cast<int>(z.size());
  if (N == 0) return {};

  // Per-panel near/far coefficients, panel m = [m dt, (m+1) dt].
  std::vector<double> near(std::max(N - 1, 0)), far(std::max(N - 1, 0));
  for (int m = 0; m + 1 < N; ++m) {
    const double a = m * dt, b = (m + 1) * dt;
    double n_acc = 0.0, f_acc = 0.0;
    for (const auto& term : kernel.terms) {
      const auto mo = detail::kernel_moments(term.exponent, kernel.gamma, a, b);
      n_acc += term.lambda * ((m + 1) * mo[0] - mo[1] / dt);
      f_acc += term.lambda * (mo[1] / dt - m * mo[0]);
    }
    near[m] = n_acc;
    far[m] = f_acc;
  }

  double max_row = 0.0;
  for (int n = 1; n < N; ++n) {
    double row = std::abs(near[0]);
    for (int m = 1; m < n; ++m) row += std::abs(near[m] + far[m - 1]);
    row += std::abs(far[n - 1]);
    max_row = std::max(max_row, row);
  }
  if (max_row >= 1.0)
    throw std::runtime_error("volterra_solve: quadrature row-sum norm >= 1, no contraction");

  std::vector<double> psi(N);
  psi[0] = z[0];
  for (int n = 1; n < N; ++n) {
    double acc = z[n] + far[n - 1] * psi[0];
    for (int m = 1; m < n; ++m) acc += (near[m] + far[m - 1]) * psi[n - m];
    psi[n] = acc / (1.0 - near[0]);
  }
  return psi;
}

struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

inline LogLinearFit fit_loglinear(const std::vector<double>& t,
                                  const std::vector<double>& y, double t_lo,
                                  double t_hi, double floor) {
  LogLinearFit f;
  std::vector<double> xs, ys;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(y[i] > floor)) continue;
    xs.push_back(t[i]);
    ys.push_back(std::log(y[i]));
  }
  f.n_points = static_cast<int>(xs.size());
  if (f.n_points < 3) return f;
  const double n = static_cast<double>(f.n_points);
  const double sx = std::accumulate(xs.begin(), xs.end(), 0.0);
  const double sy = std::accumulate(ys.begin(), ys.end(), 0.0);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < f.n_points; ++i) {
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  if (!(vx > 0.0)) return f;
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r_squared = (vy > 0.0) ? cxy * cxy / (vx * vy) : 1.0;
  return f;
}

struct DecayReport {
  std::vector<double> times;
  std::vector<double> phi;
  bool fit_skipped = false;
  double delta_measured = 0.0;
  double prefactor = 0.0;  // envelope constant C_fit
  double r_squared = 0.0;
  bool envelope_pass = false;
  double delta_bound_theoretical = std::numeric_limits<double>::quiet_NaN();
  double c_delta_theoretical = std::numeric_limits<double>::quiet_NaN();
  bool theory_feasible = false;
  bool base_smallness_pass = false;
  bool perturbed_smallness_pass = false;
  IterationReport base_iterations, perturbed_iterations;
};

struct StabilityRates {
  double gamma = 0.0;
  double C_tilde = 0.0;
  ConeExponents exps{};
};

// gamma = min{gamma_{p,p}, gamma_{p/3,p}, (gamma_{p,p}+gamma_{p/2,p})/2},
// C~ = max{C^{2/p}, C^{1/p+1/d}}, theta = 2/p, theta~ = 1/p + 1/d.
inline StabilityRates stability_rates(double p, int d, const SemigroupConfig& sc) {
  StabilityRates r;
  const double a = gamma_pq(p, p, sc.delta_d);
  const double b = gamma_pq(p / 3.0, p, sc.delta_d);
  const double bt = 0.5 * (gamma_pq(p, p, sc.delta_d) + gamma_pq(0.5 * p, p, sc.delta_d));
  r.gamma = std::min({a, b, bt});
  r.C_tilde = std::max(std::pow(sc.C, 2.0 / p), std::pow(sc.C, 1.0 / p + 1.0 / d));
  r.exps = ConeExponents{2.0 / p, 1.0 / p + 1.0 / d};
  return r;
}

inline DecayReport perturbation_experiment(const ProblemData& base,
                                           const State& perturbation,
                                           const DuhamelIntegrator& duh,
                                           const SolverConfig& cfg,
                                           const TheoremConstants& consts) {
  DecayReport rep;
  const double p = cfg.p;
  DataNorms base_norms = measure_data_norms(base, cfg);
  ProblemData pert = base;
  pert.init = base.init + perturbation;
  DataNorms pert_norms = measure_data_norms(pert, cfg);
  rep.base_smallness_pass = smallness_check(base_norms, consts, cfg).all_pass;
  rep.perturbed_smallness_pass = smallness_check(pert_norms, consts, cfg).all_pass;
  if (!rep.base_smallness_pass || !rep.perturbed_smallness_pass)
    std::cerr << "perturbation_experiment: smallness hypothesis not met; running anyway\n";

  PicardResult a = picard_solve(base, duh, cfg);
  PicardResult b = picard_solve(pert, duh, cfg);
  rep.base_iterations = a.report;
  rep.perturbed_iterations = b.report;
  if (!a.report.converged || !b.report.converged)
    throw std::runtime_error("perturbation_experiment: picard solve did not converge");

  double scale = 0.0;
  for (int n = 0; n < a.traj.n_nodes(); ++n) {
    rep.times.push_back(a.traj.time(n));
    const double d = product_norm(b.traj.states[n] - a.traj.states[n], p);
    rep.phi.push_back(d);
    scale = std::max({scale, a.traj.sup_product_norm(p), d});
  }

  const double floor = 100.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);
  const double peak = *std::max_element(rep.phi.begin(), rep.phi.end());
  if (peak <= floor) {
    rep.fit_skipped = true;
    rep.envelope_pass = true;
    rep.r_squared = 1.0;
  } else {
    LogLinearFit fit = fit_loglinear(rep.times, rep.phi, 1.0, cfg.t_max, floor);
    rep.delta_measured = -fit.slope;
    rep.r_squared = fit.r_squared;
    rep.prefactor = std::exp(fit.intercept) * 1.10;
    rep.envelope_pass = fit.n_points >= 3;
    for (size_t i = 0; i < rep.phi.size(); ++i) {
      if (rep.phi[i] <= floor) continue;
      if (rep.phi[i] > rep.prefactor * std::exp(-rep.delta_measured * rep.times[i]))
        rep.envelope_pass = false;
    }
  }

  StabilityRates rates = stability_rates(p, duh.grid().d, duh.semigroup().config());
  try {
    const double db = delta_bound(rates.gamma, cfg.rho, rates.C_tilde, rates.exps.theta,
                                  rates.exps.theta_tilde, base_norms.h_norm);
    rep.delta_bound_theoretical = db;
    if (db > 0.0) {
      rep.theory_feasible = true;
      rep.c_delta_theoretical = c_delta(consts.M, cfg.rho, rates.C_tilde, rates.gamma,
                                        0.5 * db, base_norms.h_norm, rates.exps);
    }
  } catch (const std::domain_error&) {
    rep.theory_feasible = false;
  }
  return rep;
}

}  // namespace hypbq
