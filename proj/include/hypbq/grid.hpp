#pragma once

// Truncated geodesic-polar discretization of the real hyperbolic space H^d,
// d in {2,3}, metric dtau^2 + sinh(tau)^2 domega^2. Cell-centered radial
// nodes avoid the coordinate singularity at tau = 0; d = 3 runs in a
// rotationally symmetric (radial-only) mode.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hypbq {

using Vec = Eigen::VectorXd;

struct ManifoldGrid {
  int d = 2;
  double tau_max = 6.0;
  int n_tau = 0;
  int n_omega = 1;
  double dtau = 0.0;
  double dphi = 0.0;   // angular step (d = 2), 0 for d = 3
  Vec tau_nodes;       // n_tau cell centers
  Vec phi_nodes;       // n_omega angular nodes (d = 2)
  Vec weights;         // per-node quadrature weights, size n_nodes()

  int n_nodes() const { return n_tau * n_omega; }
  int idx(int j, int k) const { return j * n_omega + k; }
  double tau_of(int node) const { return tau_nodes[node / n_omega]; }
};

inline ManifoldGrid build_grid(int d, double tau_max, int n_tau, int n_omega) {
  if (d != 2 && d != 3)
    throw std::invalid_argument("build_grid: d must be 2 or 3, got " + std::to_string(d));
  if (!(tau_max > 0.0))
    throw std::invalid_argument("build_grid: tau_max must be positive");
  if (n_tau < 8)
    throw std::invalid_argument("build_grid: n_tau must be >= 8");
  if (d == 3 && n_omega != 1)
    throw std::invalid_argument("build_grid: d = 3 runs radial-only (n_omega must be 1)");
  if (d == 2 && (n_omega < 4 || n_omega % 2 != 0))
    throw std::invalid_argument("build_grid: d = 2 needs even n_omega >= 4");

  ManifoldGrid g;
  g.d = d;
  g.tau_max = tau_max;
  g.n_tau = n_tau;
  g.n_omega = (d == 2) ? n_omega : 1;
  g.dtau = tau_max / n_tau;
  g.dphi = (d == 2) ? 2.0 * M_PI / g.n_omega : 0.0;

  g.tau_nodes.resize(n_tau);
  for (int j = 0; j < n_tau; ++j) g.tau_nodes[j] = (j + 0.5) * g.dtau;

  g.phi_nodes.resize(g.n_omega);
  for (int k = 0; k < g.n_omega; ++k)
    g.phi_nodes[k] = (d == 2) ? (k + 0.5) * g.dphi : 0.0;

  const double domega = (d == 3) ? 4.0 * M_PI : g.dphi;
  g.weights.resize(g.n_nodes());
  for (int j = 0; j < n_tau; ++j) {
    const double s = std::sinh(g.tau_nodes[j]);
    const double w = std::pow(s, d - 1) * g.dtau * domega;
    for (int k = 0; k < g.n_omega; ++k) g.weights[g.idx(j, k)] = w;
  }
  return g;
}

}  // namespace hypbq
