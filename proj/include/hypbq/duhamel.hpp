#pragma once

// The three Duhamel integral operators of the mild formulation and the
// linear mild solution.
//
// All integrals ride one forward recurrence: with J_n the trapezoid value of
// int_0^{t_n} e^{-(t_n - s)A} q(s) ds,
//
//   J_0 = 0,   J_n = e^{-dt A}(J_{n-1} + (dt/2) q_{n-1}) + (dt/2) q_n,
//
// so a whole trajectory costs O(N) semigroup applications. Operators whose
// integrand carries a divergence lose smoothing as s -> t; for those the
// last panel [t_{n-1}, t_n] is replaced by a graded five-point rule whose
// weights are exact on {1, s, s^2, W(s), s W(s)} with W(s) = s^{-theta~}
// e^{-beta~ s}, the kernel shape of the smoothing estimate. The trapezoid
// part of such outputs is e^{-dt A} J_{n-1} (the history up to t_{n-1}).
//
// Integrands carry the Leray projection on their velocity row, matching the
// projected form of the mild operators, and each output node is projected
// once more. The running integral itself is left alone: interleaving the
// projector with the propagator every step acts as a first-order splitting
// and caps the observable dt-refinement order.

#include "hypbq/forcing.hpp"
#include "hypbq/projection.hpp"
#include "hypbq/semigroup.hpp"
#include "hypbq/constants.hpp"

#include <array>
#include <functional>
#include <vector>

namespace hypbq {

struct Trajectory {
  const ManifoldGrid* grid = nullptr;
  double dt = 0.0;
  std::vector<State> states;

  static Trajectory zero(const ManifoldGrid& g, double dt, int n_nodes) {
    Trajectory tr{&g, dt, {}};
    tr.states.reserve(n_nodes);
    for (int n = 0; n < n_nodes; ++n) tr.states.push_back(State::zero(g, n * dt));
    return tr;
  }

  int n_nodes() const { return static_cast<int>(states.size()); }
  double time(int n) const { return n * dt; }

  double sup_product_norm(double p) const {
    double m = 0.0;
    for (const State& s : states) m = std::max(m, product_norm(s, p));
    return m;
  }
};

inline void check_compatible(const Trajectory& a, const Trajectory& b) {
  if (a.grid != b.grid || a.n_nodes() != b.n_nodes() ||
      std::abs(a.dt - b.dt) > 1e-15)
    throw std::invalid_argument("trajectories have mismatched grids or time nodes");
}

class DuhamelIntegrator {
 public:
  DuhamelIntegrator(const DiffOps& ops, const Projector& proj,
                    const SemigroupOp& sg, double p, double dt)
      : ops_(&ops), proj_(&proj), sg_(&sg), p_(p), dt_(dt) {
    const int d = ops.grid->d;
    if (!(p > d)) throw std::invalid_argument("DuhamelIntegrator: requires p > d");
    if (!(dt > 0.0)) throw std::invalid_argument("DuhamelIntegrator: dt must be positive");
    const double dd = sg.config().delta_d;
    theta_tilde_ = 0.5 * d * (1.0 / p + 1.0 / d);
    beta_tilde_ = 0.5 * (gamma_pq(p, p, dd) + gamma_pq(0.5 * p, p, dd));
    build_endpoint_rule();
  }

  const ManifoldGrid& grid() const { return *ops_->grid; }
  const DiffOps& ops() const { return *ops_; }
  const Projector& projector() const { return *proj_; }
  const SemigroupOp& semigroup() const { return *sg_; }
  double dt() const { return dt_; }
  double p() const { return p_; }
  double theta_tilde() const { return theta_tilde_; }
  double beta_tilde() const { return beta_tilde_; }

  using Sampler = std::function<State(int)>;

  // Forward sweep over n_nodes uniform nodes. q(n) samples the integrand at
  // t_n (signs and inner projections already applied by the caller).
  std::vector<State> integrate(const Sampler& q, int n_nodes, bool singular) const {
    const ManifoldGrid& g = grid();
    std::vector<State> out;
    out.reserve(n_nodes);
    out.push_back(State::zero(g, 0.0));
    if (n_nodes == 1) return out;

    State J = State::zero(g, 0.0);
    State q_prev = q(0);
    for (int n = 1; n < n_nodes; ++n) {
      State q_n = q(n);
      State U = sg_->apply_state(J, dt_);
      State V = sg_->apply_state(q_prev, dt_);
      J = U + (0.5 * dt_) * V + (0.5 * dt_) * q_n;
      J.t = n * dt_;
      State y = singular ? U + endpoint(q_prev, q_n) : J;
      y.u = proj_->leray_project(y.u);
      y.t = n * dt_;
      out.push_back(std::move(y));
      q_prev = std::move(q_n);
    }
    return out;
  }

  // Integrand of the bilinear operator at node n, pairing u from x with
  // (u, theta) from y: -div[P(x.u tensor y.u); x.u y.theta].
  State bilinear_integrand(const State& x, const State& y) const {
    TensorField T = proj_->project_tensor_columns(ops_->outer(x.u, y.u));
    State q{proj_->leray_project(ops_->div_tensor(T)),
            ops_->div_vector(ops_->scalar_times_vector(y.theta, x.u)), x.t};
    q = -1.0 * q;
    return q;
  }

  State coupling_integrand(const ScalarField& eta, const VectorField& h) const {
    State q{proj_->leray_project(ops_->scalar_times_vector(eta, h)),
            ScalarField::zero(grid()), 0.0};
    return q;
  }

  State forcing_integrand(const TensorField& F, const VectorField& f) const {
    State q{proj_->leray_project(ops_->div_tensor(proj_->project_tensor_columns(F))),
            ops_->div_vector(f), 0.0};
    return q;
  }

  std::vector<State> op_B_series(const Trajectory& v, const Trajectory& w,
                                 int n_nodes) const {
    check_compatible(v, w);
    if (n_nodes > v.n_nodes())
      throw std::invalid_argument("op_B: t_index beyond trajectory");
    auto q = [&](int n) { return bilinear_integrand(v.states[n], w.states[n]); };
    return integrate(q, n_nodes, true);
  }

  State op_B(const Trajectory& v, const Trajectory& w, int t_index) const {
    return op_B_series(v, w, t_index + 1).back();
  }

  std::vector<State> op_Th_series(const std::vector<ScalarField>& eta,
                                  const ForcingSet& forcing, int n_nodes) const {
    if (n_nodes > static_cast<int>(eta.size()))
      throw std::invalid_argument("op_Th: t_index beyond eta trajectory");
    auto q = [&](int n) {
      return coupling_integrand(eta[n], forcing.h_at(n * dt_));
    };
    return integrate(q, n_nodes, false);
  }

  State op_Th(const std::vector<ScalarField>& eta, const ForcingSet& forcing,
              int t_index) const {
    return op_Th_series(eta, forcing, t_index + 1).back();
  }

  std::vector<State> op_T_forcing_series(const ForcingSet& forcing, int n_nodes) const {
    auto q = [&](int n) {
      return forcing_integrand(forcing.F_at(n * dt_), forcing.f_at(n * dt_));
    };
    return integrate(q, n_nodes, true);
  }

  State op_T_forcing(const ForcingSet& forcing, int t_index) const {
    return op_T_forcing_series(forcing, t_index + 1).back();
  }

  // e^{-tA} applied to the initial state along the node grid. The data
  // enters through its solenoidal part; the carried state then propagates
  // unprojected, and each emitted node is projected once, the same treatment
  // integrate() gives its outputs.
  std::vector<State> semigroup_series(const State& init, int n_nodes) const {
    std::vector<State> out;
    out.reserve(n_nodes);
    State carry = init;
    carry.u = proj_->leray_project(carry.u);
    carry.t = 0.0;
    out.push_back(carry);
    for (int n = 1; n < n_nodes; ++n) {
      carry = sg_->apply_state(carry, dt_);
      State y = carry;
      y.u = proj_->leray_project(y.u);
      y.t = n * dt_;
      out.push_back(std::move(y));
    }
    return out;
  }

 private:
  // Nodes s_i = dt {1/16, 1/4, 9/16, 3/4, 1}; weights integrate
  // {1, s, s^2, W, sW} exactly over [0, dt].
  void build_endpoint_rule() {
    const double dt = dt_, th = theta_tilde_, bt = beta_tilde_;
    sigma_ = {dt / 16.0, dt / 4.0, 9.0 * dt / 16.0, 0.75 * dt, dt};
    auto W = [&](double s) { return std::pow(s, -th) * std::exp(-bt * s); };
    Eigen::Matrix<double, 5, 5> A;
    Eigen::Matrix<double, 5, 1> m;
    for (int i = 0; i < 5; ++i) {
      A(0, i) = 1.0;
      A(1, i) = sigma_[i];
      A(2, i) = sigma_[i] * sigma_[i];
      A(3, i) = W(sigma_[i]);
      A(4, i) = sigma_[i] * W(sigma_[i]);
    }
    m(0) = dt;
    m(1) = 0.5 * dt * dt;
    m(2) = dt * dt * dt / 3.0;
    m(3) = std::pow(bt, th - 1.0) * lower_incomplete_gamma(1.0 - th, bt * dt);
    m(4) = std::pow(bt, th - 2.0) * lower_incomplete_gamma(2.0 - th, bt * dt);
    Eigen::Matrix<double, 5, 1> w = A.fullPivLu().solve(m);
    for (int i = 0; i < 5; ++i) weight_[i] = w(i);
  }

  // Graded rule on the last panel; q interpolates linearly between the two
  // endpoint samples, q(t_n - s) = q_n + (s/dt)(q_{n-1} - q_n).
  State endpoint(const State& q_prev, const State& q_n) const {
    State acc = State::zero(grid(), 0.0);
    for (int i = 0; i < 5; ++i) {
      const double s = sigma_[i];
      State qs = q_n + (s / dt_) * (q_prev - q_n);
      acc = acc + weight_[i] * sg_->apply_state(qs, s);
    }
    return acc;
  }

  const DiffOps* ops_;
  const Projector* proj_;
  const SemigroupOp* sg_;
  double p_, dt_, theta_tilde_, beta_tilde_;
  std::array<double, 5> sigma_{};
  std::array<double, 5> weight_{};
};

struct BoundCheck {
  double sup_measured = 0.0;
  double data_norm = 0.0;   // product norm of (u0, theta0), L^p
  double eta_norm = 0.0;    // sup_t ||eta||_{L^p}
  double h_norm = 0.0;      // sup_t ||h||_{L^{p/2}}
  double ff_norm = 0.0;     // sup_t max(||F||_{L^{p/2}}, ||f||_{L^{p/2}})
  double bound(double C, double N, double M) const {
    return C * data_norm + N * h_norm * eta_norm + M * ff_norm;
  }
};

struct LinearMildResult {
  Trajectory traj;
  BoundCheck check;
};

inline double forcing_h_norm(const ForcingSet& forcing, double p, double dt, int n_nodes) {
  double m = 0.0;
  for (int n = 0; n < n_nodes; ++n)
    m = std::max(m, lp_norm(forcing.h_at(n * dt), 0.5 * p));
  return m;
}

inline double forcing_ff_norm(const ForcingSet& forcing, double p, double dt, int n_nodes) {
  double m = 0.0;
  for (int n = 0; n < n_nodes; ++n) {
    m = std::max(m, lp_norm(forcing.F_at(n * dt), 0.5 * p));
    m = std::max(m, lp_norm(forcing.f_at(n * dt), 0.5 * p));
  }
  return m;
}

// e^{-tA}(u0, theta0) + T_h(eta)(t) + T(F, f)(t) on the node grid.
inline LinearMildResult linear_mild_solution(const DuhamelIntegrator& duh,
                                             const State& init,
                                             const std::vector<ScalarField>& eta,
                                             const ForcingSet& forcing,
                                             int n_nodes) {
  const ManifoldGrid& g = duh.grid();
  auto lin = duh.semigroup_series(init, n_nodes);
  auto th = duh.op_Th_series(eta, forcing, n_nodes);
  auto tf = duh.op_T_forcing_series(forcing, n_nodes);
  LinearMildResult r;
  r.traj.grid = &g;
  r.traj.dt = duh.dt();
  r.traj.states.reserve(n_nodes);
  const double p = duh.p();
  for (int n = 0; n < n_nodes; ++n) {
    State s = lin[n] + th[n] + tf[n];
    s.t = n * duh.dt();
    r.check.sup_measured = std::max(r.check.sup_measured, product_norm(s, p));
    r.check.eta_norm = std::max(r.check.eta_norm, lp_norm(eta[n], p));
    r.traj.states.push_back(std::move(s));
  }
  r.check.data_norm = product_norm(init, p);
  r.check.h_norm = forcing_h_norm(forcing, p, duh.dt(), n_nodes);
  r.check.ff_norm = forcing_ff_norm(forcing, p, duh.dt(), n_nodes);
  return r;
}

}  // namespace hypbq
