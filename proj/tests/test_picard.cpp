// Fixed-point solver: exact behavior on degenerate data, contraction on a
// small-data configuration with the ratio checked against fitted constants,
// divergence detection, uniqueness of the limit, and the smallness report.

#include "hypbq/picard.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace hypbq;

namespace {

BumpProfile bump(double amp, double center, double width, int mode = 0) {
  BumpProfile b;
  b.amplitude = amp;
  b.center_tau = center;
  b.width = width;
  b.angular_mode = mode;
  return b;
}

struct Lab {
  ManifoldGrid g;
  DiffOps ops;
  Projector proj;
  SemigroupOp sg;

  explicit Lab(int n_tau, int n_omega)
      : g(build_grid(2, 6.0, n_tau, n_omega)), ops(g), proj(ops), sg(ops, SemigroupConfig{}) {}
};

// The small-data configuration used throughout: amplitudes well inside the
// contraction regime, dominated by the coupling channel.
ProblemData small_data(const Lab& lab) {
  ProblemData data;
  data.init = State{bump(2e-3, 1.5, 0.6, 1).vector_field(lab.g),
                    bump(2e-3, 2.0, 0.8).scalar_field(lab.g), 0.0};
  data.forcing = ForcingSet::build(lab.g, bump(1e-2, 1.5, 0.3, 2),
                                   bump(2e-5, 1.8, 0.7), bump(2e-5, 1.3, 0.6));
  return data;
}

SolverConfig small_cfg() {
  SolverConfig cfg;
  cfg.p = 4.0;
  cfg.rho = 0.02;
  cfg.dt = 1.0 / 16;
  cfg.t_max = 4.0;
  cfg.picard_tol = 1e-15;
  cfg.max_iters = 10;
  return cfg;
}

}  // namespace

TEST_CASE("solver config validation and node count") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate(2));
  CHECK_THROWS_AS(cfg.validate(4), std::invalid_argument);  // p must exceed d

  SolverConfig bad = cfg;
  bad.rho = 0.0;
  CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);
  bad = cfg;
  bad.dt = 0.0;
  CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);
  bad = cfg;
  bad.t_max = 0.5 * bad.dt;
  CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);
  bad = cfg;
  bad.picard_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);
  bad = cfg;
  bad.max_iters = 0;
  CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);

  cfg.dt = 1.0 / 16;
  cfg.t_max = 4.0;
  CHECK(cfg.n_nodes() == 65);
}

TEST_CASE("zero data fixes the origin in one iteration") {
  Lab lab(24, 8);
  SolverConfig cfg;
  cfg.dt = 1.0 / 16;
  cfg.t_max = 1.0;
  DuhamelIntegrator duh(lab.ops, lab.proj, lab.sg, cfg.p, cfg.dt);
  ProblemData data{State::zero(lab.g, 0.0), ForcingSet::zero(lab.g)};

  PicardResult r = picard_solve(data, duh, cfg);
  CHECK(r.report.converged);
  CHECK(r.report.iterations == 1);
  CHECK(r.report.final_residual == 0.0);
  CHECK(r.traj.sup_product_norm(cfg.p) == 0.0);
}

TEST_CASE("first iterate from the origin is the linear mild solution") {
  Lab lab(24, 8);
  SolverConfig cfg;
  cfg.dt = 1.0 / 16;
  cfg.t_max = 1.0;
  cfg.max_iters = 1;
  cfg.rho = 1.0;
  DuhamelIntegrator duh(lab.ops, lab.proj, lab.sg, cfg.p, cfg.dt);
  ProblemData data = small_data(lab);

  PicardResult r = picard_solve(data, duh, cfg);
  std::vector<ScalarField> eta_zero(cfg.n_nodes(), ScalarField::zero(lab.g));
  LinearMildResult lin = linear_mild_solution(duh, data.init, eta_zero,
                                              data.forcing, cfg.n_nodes());
  const double scale = lin.traj.sup_product_norm(cfg.p);
  CHECK(sup_diff_norm(r.traj, lin.traj, cfg.p) <= 1e-14 * scale);
}

TEST_CASE("small data contracts at a rate the fitted constants predict") {
  Lab lab(48, 16);
  SolverConfig cfg = small_cfg();
  DuhamelIntegrator duh(lab.ops, lab.proj, lab.sg, cfg.p, cfg.dt);
  ProblemData data = small_data(lab);

  DataNorms norms = measure_data_norms(data, cfg);
  PicardResult r = picard_solve(data, duh, cfg);

  CHECK(r.report.converged);
  CHECK_FALSE(r.report.diverged);
  CHECK(r.report.iterations <= 6);
  for (size_t k = 0; k + 1 < r.report.diffs.size(); ++k)
    CHECK(r.report.diffs[k + 1] < r.report.diffs[k]);
  CHECK(r.report.final_residual < 1e-6);

  // measured contraction against the fitted-constant prediction
  std::mt19937_64 rng(12345);
  FittedConstants fc = fit_constants(duh, rng, 6, 9);
  const double predicted = 2.0 * fc.M_bilinear * cfg.rho + fc.N_fit * norms.h_norm;
  INFO("ratio " << r.report.contraction_ratio << " predicted " << predicted);
  CHECK(r.report.contraction_ratio < 1.0);
  CHECK(r.report.ratio_stable);
  CHECK(r.report.contraction_ratio <= 1.2 * predicted);

  // fitted constants are sane
  CHECK(fc.C_fit >= 1.0 - 1e-12);
  CHECK(fc.C_fit < 3.0);
  CHECK(fc.N_fit > 0.0);
  CHECK(fc.M_bilinear > 0.0);
  CHECK(fc.M_forcing > 0.0);
  CHECK(fc.samples == 6);

  // solution velocity stays divergence-free along the trajectory
  for (int n = 0; n < r.traj.n_nodes(); ++n) {
    const double un = lp_norm(r.traj.states[n].u, 2);
    if (un == 0.0) continue;
    CHECK(lp_norm(lab.ops.div_vector(r.traj.states[n].u), 2) <= 1e-6 * un);
  }

  // the closed-form smallness conditions hold for this data
  const double beta = gamma_pq(cfg.p / 3.0, cfg.p, lab.sg.config().delta_d);
  const double bt = 0.5 * (gamma_pq(cfg.p, cfg.p, lab.sg.config().delta_d) +
                           gamma_pq(0.5 * cfg.p, cfg.p, lab.sg.config().delta_d));
  TheoremConstants consts{1.0, bound_M(1.0, cfg.p, 2, bt), bound_N(1.0, cfg.p, beta, 2)};
  SmallnessReport small = smallness_check(norms, consts, cfg);
  CHECK(small.conditions.size() == 5);
  CHECK(small.all_pass);
  SmallnessReport small_periodic = smallness_check(norms, consts, cfg, true);
  CHECK(small_periodic.conditions.size() == 6);
  for (const SmallnessCondition& c : small_periodic.conditions) {
    CHECK(c.pass == (c.lhs < c.rhs));
    CHECK(c.margin == Catch::Approx(c.rhs - c.lhs));
  }
}

TEST_CASE("uniqueness: a different admissible start reaches the same limit") {
  Lab lab(32, 8);
  SolverConfig cfg = small_cfg();
  cfg.t_max = 2.0;
  cfg.picard_tol = 1e-13;
  DuhamelIntegrator duh(lab.ops, lab.proj, lab.sg, cfg.p, cfg.dt);
  ProblemData data = small_data(lab);

  PicardResult a = picard_solve(data, duh, cfg);
  REQUIRE(a.report.converged);

  Trajectory start = Trajectory::zero(lab.g, cfg.dt, cfg.n_nodes());
  State seed{lab.proj.leray_project(bump(2e-3, 1.8, 0.7, 2).vector_field(lab.g)),
             bump(2e-3, 1.6, 0.9).scalar_field(lab.g), 0.0};
  for (int n = 0; n < start.n_nodes(); ++n) {
    start.states[n] = std::exp(-0.5 * n * cfg.dt) * seed;
    start.states[n].t = n * cfg.dt;
  }
  PicardResult b = picard_solve(data, duh, cfg, &start);
  REQUIRE(b.report.converged);

  const double scale = a.traj.sup_product_norm(cfg.p);
  CHECK(sup_diff_norm(a.traj, b.traj, cfg.p) <= 100.0 * cfg.picard_tol * std::max(1.0, scale));

  // incompatible starts are rejected
  Trajectory wrong_nodes = Trajectory::zero(lab.g, cfg.dt, cfg.n_nodes() + 1);
  CHECK_THROWS_AS(picard_solve(data, duh, cfg, &wrong_nodes), std::invalid_argument);
  Trajectory wrong_dt = Trajectory::zero(lab.g, 2.0 * cfg.dt, cfg.n_nodes());
  CHECK_THROWS_AS(picard_solve(data, duh, cfg, &wrong_dt), std::invalid_argument);
}

TEST_CASE("large data trips the divergence flag and fails smallness") {
  Lab lab(24, 8);
  SolverConfig cfg;
  cfg.p = 4.0;
  cfg.rho = 0.02;
  cfg.dt = 1.0 / 8;
  cfg.t_max = 1.0;
  cfg.max_iters = 8;
  DuhamelIntegrator duh(lab.ops, lab.proj, lab.sg, cfg.p, cfg.dt);

  ProblemData data;
  data.init = State{bump(3.0, 1.5, 0.6, 1).vector_field(lab.g),
                    bump(3.0, 2.0, 0.8).scalar_field(lab.g), 0.0};
  data.forcing = ForcingSet::build(lab.g, bump(2.0, 1.5, 0.5, 1),
                                   bump(1.0, 1.8, 0.7), bump(1.0, 1.3, 0.6));

  // iterates leave the trust ball; capture the warning chatter
  std::ostringstream trap;
  std::streambuf* old = std::cerr.rdbuf(trap.rdbuf());
  PicardResult r = picard_solve(data, duh, cfg);
  std::cerr.rdbuf(old);

  CHECK(r.report.diverged);
  CHECK_FALSE(r.report.converged);
  CHECK(trap.str().find("ball") != std::string::npos);

  DataNorms norms = measure_data_norms(data, cfg);
  TheoremConstants consts{1.0, 5.44, 4.51};
  SmallnessReport small = smallness_check(norms, consts, cfg);
  CHECK_FALSE(small.all_pass);
  bool init_cond_fails = false;
  for (const SmallnessCondition& c : small.conditions)
    if (c.name.find("u0") != std::string::npos && !c.pass) init_cond_fails = true;
  CHECK(init_cond_fails);
}
