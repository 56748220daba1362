// Heat propagators: decay-rate bookkeeping, the closed-form kernels (pinned
// against high-precision quadrature of the integral representations), and the
// theta-scheme stepper checked against kernel convolution on radial data.

#include "hypbq/semigroup.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

using namespace hypbq;

namespace {

ScalarField radial_bump(const ManifoldGrid& g, double center, double sigma) {
  ScalarField f = ScalarField::zero(g);
  for (int j = 0; j < g.n_tau; ++j)
    for (int k = 0; k < g.n_omega; ++k)
      f.values[g.idx(j, k)] =
          std::exp(-0.5 * std::pow((g.tau_nodes[j] - center) / sigma, 2));
  return f;
}

double mass(const ScalarField& f) {
  double m = 0.0;
  for (int i = 0; i < f.grid->n_nodes(); ++i) m += f.grid->weights[i] * f.values[i];
  return m;
}

double rel_l2(const ScalarField& a, const ScalarField& b) {
  ScalarField d{a.grid, a.values - b.values};
  return lp_norm(d, 2) / lp_norm(b, 2);
}

}  // namespace

TEST_CASE("semigroup config rejects out-of-range parameters") {
  SemigroupConfig ok;
  CHECK_NOTHROW(ok.validate());

  SemigroupConfig c;
  c.C = 0.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SemigroupConfig{};
  c.delta_d = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SemigroupConfig{};
  c.cn_steps_per_unit_time = 8;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SemigroupConfig{};
  c.theta_scheme = 0.4;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.theta_scheme = 1.1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("on-diagonal decay factor switches from power law to plateau at t = 1") {
  SemigroupConfig cfg;
  CHECK(h_d(0.25, cfg, 2) == Catch::Approx(4.0).epsilon(1e-14));
  CHECK(h_d(0.25, cfg, 3) == Catch::Approx(8.0).epsilon(1e-14));
  CHECK(h_d(4.0, cfg, 2) == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(h_d(4.0, cfg, 3) == Catch::Approx(1.0).epsilon(1e-14));
  cfg.C = 2.5;
  CHECK(h_d(0.25, cfg, 2) == Catch::Approx(10.0).epsilon(1e-14));
  CHECK_THROWS_AS(h_d(0.0, cfg, 2), std::invalid_argument);
  CHECK_THROWS_AS(h_d(-1.0, cfg, 2), std::invalid_argument);
}

TEST_CASE("exponential rate between Lebesgue exponents matches hand values") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(gamma_pq(4.0 / 3.0, 4.0, 1.0) == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(gamma_pq(4.0, 4.0, 1.0) == Catch::Approx(0.75).epsilon(1e-14));
  CHECK(gamma_pq(2.0, 4.0, 1.0) == Catch::Approx(0.625).epsilon(1e-14));
  CHECK(gamma_pq(1.0, inf, 1.0) == Catch::Approx(0.5).epsilon(1e-14));
  // linear in the base rate
  CHECK(gamma_pq(2.0, 4.0, 0.25) == Catch::Approx(0.25 * 0.625).epsilon(1e-14));
  CHECK_THROWS_AS(gamma_pq(4.0, 2.0, 0.25), std::invalid_argument);
}

TEST_CASE("dispersive bound combines the two decay mechanisms") {
  SemigroupConfig cfg;  // C = 1, delta_d = 1/4
  const double inf = std::numeric_limits<double>::infinity();
  // p = 1, q = inf, t = 1/4, d = 2: h^1 e^{-t delta_d/2} = 4 e^{-1/32}
  CHECK(dispersive_bound(1.0, inf, 0.25, cfg, 2) ==
        Catch::Approx(4.0 * std::exp(-1.0 / 32.0)).epsilon(1e-14));
  // p = q: pure exponential, no smoothing factor
  CHECK(dispersive_bound(2.0, 2.0, 3.0, cfg, 3) ==
        Catch::Approx(std::exp(-3.0 * gamma_pq(2.0, 2.0, 0.25))).epsilon(1e-14));
  // monotone decreasing in t
  double prev = std::numeric_limits<double>::infinity();
  for (double t : {0.01, 0.1, 0.5, 1.0, 2.0, 8.0}) {
    const double b = dispersive_bound(1.0, inf, t, cfg, 2);
    CHECK(b < prev);
    prev = b;
  }
  CHECK_THROWS_AS(dispersive_bound(4.0, 2.0, 1.0, cfg, 2), std::invalid_argument);
}

TEST_CASE("closed-form kernels match high-precision quadrature oracles") {
  // values pinned from 30-digit quadrature of the integral representations
  CHECK(heat_kernel_closed(3, 1.0, 1.0) ==
        Catch::Approx(5.47274077637e-3).epsilon(1e-9));
  CHECK(heat_kernel_closed(2, 1.0, 1.0) ==
        Catch::Approx(4.14911839578e-2).epsilon(1e-9));
  CHECK(heat_kernel_closed(2, 0.5, 1.0) ==
        Catch::Approx(7.57267526436e-2).epsilon(1e-9));
  // on-diagonal value in 3d is elementary
  CHECK(heat_kernel_closed(3, 1.0, 0.0) ==
        Catch::Approx(std::exp(-1.0) * std::pow(4.0 * M_PI, -1.5)).epsilon(1e-12));
  // the r -> 0 branch in 2d joins continuously
  CHECK(heat_kernel_closed(2, 1.0, 1e-13) ==
        Catch::Approx(heat_kernel_closed(2, 1.0, 1e-3)).epsilon(1e-4));

  CHECK_THROWS_AS(heat_kernel_closed(2, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(heat_kernel_closed(2, 1.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(heat_kernel_closed(5, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("kernel mass is one for both dimensions and several times") {
  for (int d : {2, 3})
    for (double t : {0.1, 1.0})
      CHECK(heat_kernel_mass(d, t) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("radial detector tolerates radial fields and flags angular content") {
  ManifoldGrid g = build_grid(2, 6.0, 32, 8);
  ScalarField f = radial_bump(g, 1.5, 0.5);
  CHECK(is_radial(f));
  f.values[g.idx(10, 3)] += 1e-6;
  CHECK_FALSE(is_radial(f));

  ManifoldGrid g3 = build_grid(3, 6.0, 32, 1);
  CHECK(is_radial(radial_bump(g3, 1.5, 0.5)));
}

TEST_CASE("kernel convolution rejects bad inputs") {
  ManifoldGrid g = build_grid(2, 6.0, 32, 8);
  ScalarField f = radial_bump(g, 1.5, 0.5);
  CHECK_THROWS_AS(scalar_semigroup_kernel_apply(f, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(scalar_semigroup_kernel_apply(f, -1.0), std::invalid_argument);
  f.values[g.idx(4, 1)] += 1.0;
  CHECK_THROWS_AS(scalar_semigroup_kernel_apply(f, 0.5), std::invalid_argument);
}

TEST_CASE("discrete kernel convolution conserves mass and positivity") {
  for (int d : {2, 3}) {
    ManifoldGrid g = build_grid(d, 6.0, 128, d == 3 ? 1 : 4);
    ScalarField f = radial_bump(g, 1.5, 0.5);
    ScalarField Kf = scalar_semigroup_kernel_apply(f, 0.5);
    CHECK(std::abs(mass(Kf) - mass(f)) / mass(f) < 1e-2);
    CHECK(Kf.values.minCoeff() >= -1e-12 * Kf.values.maxCoeff());
    // short times approximate the identity
    CHECK(rel_l2(scalar_semigroup_kernel_apply(f, 0.02), f) < 0.12);
  }
}

TEST_CASE("theta-scheme stepper is the identity at t = 0 and rejects t < 0") {
  ManifoldGrid g = build_grid(2, 6.0, 32, 8);
  DiffOps ops(g);
  SemigroupOp sg(ops, SemigroupConfig{});
  ScalarField f = radial_bump(g, 2.0, 0.6);
  VectorField v = VectorField::zero(g);
  v.comp(0, g.idx(5, 2)) = 1.0;

  CHECK((sg.apply_scalar(f, 0.0).values - f.values).norm() == 0.0);
  CHECK((sg.apply_vector(v, 0.0).comps - v.comps).norm() == 0.0);
  CHECK_THROWS_AS(sg.apply_scalar(f, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(sg.apply_vector(v, -0.1), std::invalid_argument);
}

TEST_CASE("stepper satisfies the semigroup property") {
  for (int d : {2, 3}) {
    ManifoldGrid g = build_grid(d, 6.0, 64, d == 3 ? 1 : 8);
    DiffOps ops(g);
    SemigroupConfig cfg;
    cfg.cn_steps_per_unit_time = 32;
    SemigroupOp sg(ops, cfg);
    ScalarField f = radial_bump(g, 1.5, 0.5);

    // commensurate split reuses the same factorization: exact
    ScalarField p1 = sg.apply_scalar(sg.apply_scalar(f, 0.25), 0.25);
    ScalarField p2 = sg.apply_scalar(f, 0.5);
    CHECK(rel_l2(p1, p2) < 1e-12);

    // incommensurate split differs only by scheme error
    ScalarField q1 = sg.apply_scalar(sg.apply_scalar(f, 0.3), 0.4);
    ScalarField q2 = sg.apply_scalar(f, 0.7);
    CHECK(rel_l2(q1, q2) < 1e-6);
  }
}

TEST_CASE("stepper contracts scalars and beats the zeroth-order decay floor on vectors") {
  for (int d : {2, 3}) {
    ManifoldGrid g = build_grid(d, 6.0, 64, d == 3 ? 1 : 8);
    DiffOps ops(g);
    SemigroupOp sg(ops, SemigroupConfig{});

    ScalarField f = radial_bump(g, 1.5, 0.5);
    CHECK(lp_norm(sg.apply_scalar(f, 0.5), 2) < lp_norm(f, 2));

    VectorField v = VectorField::zero(g);
    for (int j = 0; j < g.n_tau; ++j)
      for (int k = 0; k < g.n_omega; ++k) {
        const double t = g.tau_nodes[j];
        v.comp(0, g.idx(j, k)) = std::exp(-0.5 * std::pow((t - 2.0) / 0.7, 2));
        if (d == 2)
          v.comp(1, g.idx(j, k)) = 0.3 * std::exp(-0.5 * std::pow((t - 1.2) / 0.5, 2));
      }
    const double ratio = lp_norm(sg.apply_vector(v, 0.5), 2) / lp_norm(v, 2);
    CHECK(ratio <= std::exp(-(d - 1) * 0.5) * (1.0 + 1e-12));
    // the Bochner part alone is already a contraction
    CHECK(lp_norm(sg.apply_vector_no_zeroth(v, 0.5), 2) <= lp_norm(v, 2) * (1.0 + 1e-12));
  }
}

TEST_CASE("stepper agrees with kernel convolution on radial data") {
  for (int d : {2, 3}) {
    ManifoldGrid g = build_grid(d, 6.0, 128, d == 3 ? 1 : 4);
    DiffOps ops(g);
    SemigroupConfig cfg;
    cfg.cn_steps_per_unit_time = 32;
    SemigroupOp sg(ops, cfg);
    ScalarField f = radial_bump(g, 1.5, 0.5);
    ScalarField cn = sg.apply_scalar(f, 0.5);
    ScalarField kv = scalar_semigroup_kernel_apply(f, 0.5);
    CHECK(rel_l2(cn, kv) < 1e-3);
  }
}
