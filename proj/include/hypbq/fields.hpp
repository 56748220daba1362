#pragma once

// Grid samples of scalar, vector and second-order tensor quantities in the
// orthonormal frame e_tau = d/dtau, e_phi = (1/sinh tau) d/dphi, plus the
// weighted L^p norms and the velocity-temperature pair (State) with its
// max-product norm.

#include "hypbq/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hypbq {

struct ScalarField {
  const ManifoldGrid* grid = nullptr;
  Vec values;

  static ScalarField zero(const ManifoldGrid& g) {
    return {&g, Vec::Zero(g.n_nodes())};
  }
};

// Frame components stacked per component: [a_tau; a_phi] (d = 2) or [a_tau] (d = 3).
struct VectorField {
  const ManifoldGrid* grid = nullptr;
  Vec comps;

  static int n_comp(const ManifoldGrid& g) { return g.d == 2 ? 2 : 1; }
  static VectorField zero(const ManifoldGrid& g) {
    return {&g, Vec::Zero(static_cast<Eigen::Index>(n_comp(g)) * g.n_nodes())};
  }
  double comp(int c, int node) const { return comps[c * grid->n_nodes() + node]; }
  double& comp(int c, int node) { return comps[c * grid->n_nodes() + node]; }
};

// Row-major d x d frame components: block (r*d + c) holds T_{rc}.
struct TensorField {
  const ManifoldGrid* grid = nullptr;
  Vec comps;

  static TensorField zero(const ManifoldGrid& g) {
    return {&g, Vec::Zero(static_cast<Eigen::Index>(g.d) * g.d * g.n_nodes())};
  }
  int block(int r, int c) const { return (r * grid->d + c) * grid->n_nodes(); }
  double comp(int r, int c, int node) const {
    return comps[block(r, c) + node];
  }
  double& comp(int r, int c, int node) {
    return comps[block(r, c) + node];
  }
};

struct State {
  VectorField u;
  ScalarField theta;
  double t = 0.0;

  static State zero(const ManifoldGrid& g, double t = 0.0) {
    return {VectorField::zero(g), ScalarField::zero(g), t};
  }
};

inline void check_exponent(double p) {
  if (!(p >= 1.0))
    throw std::invalid_argument("lp_norm: exponent must satisfy p >= 1");
}

inline double lp_norm(const ScalarField& f, double p) {
  check_exponent(p);
  if (std::isinf(p)) return f.values.size() ? f.values.cwiseAbs().maxCoeff() : 0.0;
  double acc = 0.0;
  for (int i = 0; i < f.values.size(); ++i)
    acc += f.grid->weights[i] * std::pow(std::abs(f.values[i]), p);
  return std::pow(acc, 1.0 / p);
}

// Pointwise magnitude is the Euclidean norm of the frame components.
inline double lp_norm(const VectorField& v, double p) {
  check_exponent(p);
  const int n = v.grid->n_nodes();
  const int nc = VectorField::n_comp(*v.grid);
  double acc = 0.0, mx = 0.0;
  for (int i = 0; i < n; ++i) {
    double m2 = 0.0;
    for (int c = 0; c < nc; ++c) m2 += v.comp(c, i) * v.comp(c, i);
    const double m = std::sqrt(m2);
    if (std::isinf(p)) mx = std::max(mx, m);
    else acc += v.grid->weights[i] * std::pow(m, p);
  }
  return std::isinf(p) ? mx : std::pow(acc, 1.0 / p);
}

// Frobenius pointwise magnitude.
inline double lp_norm(const TensorField& T, double p) {
  check_exponent(p);
  const int n = T.grid->n_nodes();
  const int d = T.grid->d;
  double acc = 0.0, mx = 0.0;
  for (int i = 0; i < n; ++i) {
    double m2 = 0.0;
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) m2 += T.comp(r, c, i) * T.comp(r, c, i);
    const double m = std::sqrt(m2);
    if (std::isinf(p)) mx = std::max(mx, m);
    else acc += T.grid->weights[i] * std::pow(m, p);
  }
  return std::isinf(p) ? mx : std::pow(acc, 1.0 / p);
}

inline double product_norm(const State& s, double p) {
  if (s.u.grid != s.theta.grid)
    throw std::invalid_argument("product_norm: u and theta live on different grids");
  return std::max(lp_norm(s.u, p), lp_norm(s.theta, p));
}

inline State operator+(const State& a, const State& b) {
  State r = a;
  r.u.comps += b.u.comps;
  r.theta.values += b.theta.values;
  return r;
}

inline State operator-(const State& a, const State& b) {
  State r = a;
  r.u.comps -= b.u.comps;
  r.theta.values -= b.theta.values;
  return r;
}

inline State operator*(double c, const State& a) {
  State r = a;
  r.u.comps *= c;
  r.theta.values *= c;
  return r;
}

}  // namespace hypbq
