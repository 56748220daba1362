#pragma once

// Differential operators on the truncated polar grid, built as sparse
// matrices. Design: the scalar gradient G uses centered differences with
// parity ghost values (antipodal continuation through the pole, homogeneous
// Dirichlet at tau_max); the divergence is defined as the exact negative
// adjoint of G under the weighted inner product, div := -W^{-1} G^T W, and
// the scalar Laplacian as div o grad. This makes the divergence theorem,
// self-adjointness and negativity exact matrix identities, and the Leray
// projector built on top an exact orthogonal projector.
//
// Ghost parity through the pole: a cell (tau -> -tau) maps to the antipodal
// angular node. Scalar and tensor frame components continue evenly, vector
// frame components flip sign (both frame legs flip under the antipodal map,
// so rank-2 components are even again).
//
// The vector (Bochner) Laplacian is the trace of the second covariant
// derivative. In the orthonormal frame on H^2:
//   (Lap v)_tau = Lap_g a - (2 cosh tau / sinh^2 tau) d_phi b - coth^2 tau * a
//   (Lap v)_phi = Lap_g b + (2 cosh tau / sinh^2 tau) d_phi a - coth^2 tau * b
// and on radial fields in H^3:
//   (Lap v)_tau = a'' + (d-1) coth tau a' - (d-1) coth^2 tau * a.
// These forms were frozen against an independent symbolic oracle; they obey
// the commutation identity Lap (grad f) = grad (Lap_g f) - (d-1) grad f.

#include "hypbq/fields.hpp"

#include <Eigen/Sparse>
#include <vector>

namespace hypbq {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

namespace detail {

// Centered d/dtau with ghost rules. parity: +1 scalar/tensor, -1 vector.
inline SpMat dtau_matrix(const ManifoldGrid& g, int parity) {
  const int n = g.n_nodes();
  const double c = 1.0 / (2.0 * g.dtau);
  std::vector<Triplet> tr;
  tr.reserve(2 * n);
  for (int j = 0; j < g.n_tau; ++j) {
    for (int k = 0; k < g.n_omega; ++k) {
      const int row = g.idx(j, k);
      if (j + 1 < g.n_tau) tr.emplace_back(row, g.idx(j + 1, k), c);
      else tr.emplace_back(row, g.idx(j, k), -c);  // Dirichlet ghost = -f
      if (j - 1 >= 0) {
        tr.emplace_back(row, g.idx(j - 1, k), -c);
      } else {
        const int ka = (g.d == 2) ? (k + g.n_omega / 2) % g.n_omega : k;
        tr.emplace_back(row, g.idx(0, ka), -parity * c);
      }
    }
  }
  SpMat m(n, n);
  m.setFromTriplets(tr.begin(), tr.end());
  return m;
}

// (1/sinh tau) d/dphi, centered, periodic (d = 2 only).
inline SpMat dphi_matrix(const ManifoldGrid& g) {
  const int n = g.n_nodes();
  SpMat m(n, n);
  if (g.d != 2) return m;
  std::vector<Triplet> tr;
  tr.reserve(2 * n);
  for (int j = 0; j < g.n_tau; ++j) {
    const double c = 1.0 / (2.0 * g.dphi * std::sinh(g.tau_nodes[j]));
    for (int k = 0; k < g.n_omega; ++k) {
      const int row = g.idx(j, k);
      tr.emplace_back(row, g.idx(j, (k + 1) % g.n_omega), c);
      tr.emplace_back(row, g.idx(j, (k - 1 + g.n_omega) % g.n_omega), -c);
    }
  }
  m.setFromTriplets(tr.begin(), tr.end());
  return m;
}

inline SpMat vstack(const SpMat& a, const SpMat& b) {
  SpMat m(a.rows() + b.rows(), a.cols());
  std::vector<Triplet> tr;
  tr.reserve(a.nonZeros() + b.nonZeros());
  for (int c = 0; c < a.outerSize(); ++c) {
    for (SpMat::InnerIterator it(a, c); it; ++it) tr.emplace_back(it.row(), it.col(), it.value());
    for (SpMat::InnerIterator it(b, c); it; ++it)
      tr.emplace_back(it.row() + a.rows(), it.col(), it.value());
  }
  m.setFromTriplets(tr.begin(), tr.end());
  return m;
}

inline SpMat diag(const Vec& v) {
  SpMat m(v.size(), v.size());
  std::vector<Triplet> tr;
  tr.reserve(v.size());
  for (int i = 0; i < v.size(); ++i) tr.emplace_back(i, i, v[i]);
  m.setFromTriplets(tr.begin(), tr.end());
  return m;
}

}  // namespace detail

struct DiffOps {
  const ManifoldGrid* grid = nullptr;

  SpMat dtau_s;   // scalar/tensor parity
  SpMat dtau_v;   // vector parity
  SpMat dphi;     // shared (no radial ghosts involved)
  SpMat grad;     // stacked scalar gradient, (ncomp*n) x n
  SpMat div;      // exact negative weighted adjoint of grad, n x (ncomp*n)
  SpMat lap;      // div o grad
  SpMat poisson;  // grad^T W grad, SPD form of -W lap
  SpMat vlap;     // Bochner Laplacian on frame components
  Vec coth;       // per node

  explicit DiffOps(const ManifoldGrid& g) : grid(&g) {
    const int n = g.n_nodes();
    const int nc = VectorField::n_comp(g);

    dtau_s = detail::dtau_matrix(g, +1);
    dtau_v = detail::dtau_matrix(g, -1);
    dphi = detail::dphi_matrix(g);

    grad = (g.d == 2) ? detail::vstack(dtau_s, dphi) : dtau_s;

    Vec wv(nc * n);
    for (int c = 0; c < nc; ++c) wv.segment(c * n, n) = g.weights;
    SpMat Wv = detail::diag(wv);
    SpMat Winv = detail::diag(g.weights.cwiseInverse());

    SpMat gT = SpMat(grad.transpose());
    div = (Winv * (gT * Wv)) * (-1.0);
    lap = div * grad;
    poisson = gT * Wv * grad;
    poisson.makeCompressed();

    coth.resize(n);
    for (int i = 0; i < n; ++i) coth[i] = 1.0 / std::tanh(g.tau_of(i));

    // Bochner Laplacian: same mimetic second-order part with vector-parity
    // radial ghosts, plus curvature zeroth-order terms and (d = 2) the
    // angular frame coupling.
    SpMat gv = (g.d == 2) ? detail::vstack(dtau_v, dphi) : dtau_v;
    SpMat sv = (Winv * (SpMat(gv.transpose()) * Wv * gv)) * (-1.0);

    if (g.d == 2) {
      SpMat coup = detail::diag(2.0 * coth.array()) * dphi;
      SpMat czero = detail::diag(coth.array().square());
      std::vector<Triplet> tr;
      auto add_block = [&](const SpMat& m, int r0, int c0, double s) {
        for (int c = 0; c < m.outerSize(); ++c)
          for (SpMat::InnerIterator it(m, c); it; ++it)
            tr.emplace_back(it.row() + r0, it.col() + c0, s * it.value());
      };
      add_block(sv, 0, 0, 1.0);
      add_block(czero, 0, 0, -1.0);
      add_block(coup, 0, n, -1.0);
      add_block(coup, n, 0, 1.0);
      add_block(sv, n, n, 1.0);
      add_block(czero, n, n, -1.0);
      vlap.resize(2 * n, 2 * n);
      vlap.setFromTriplets(tr.begin(), tr.end());
    } else {
      vlap = sv - SpMat(detail::diag(2.0 * coth.array().square()));
    }
    vlap.makeCompressed();
    lap.makeCompressed();
    div.makeCompressed();
    grad.makeCompressed();
  }

  VectorField grad_scalar(const ScalarField& f) const {
    return {grid, grad * f.values};
  }

  ScalarField div_vector(const VectorField& v) const {
    return {grid, div * v.comps};
  }

  ScalarField laplace_beltrami(const ScalarField& f) const {
    return {grid, lap * f.values};
  }

  VectorField bochner_laplacian(const VectorField& v) const {
    return {grid, vlap * v.comps};
  }

  VectorField ebin_marsden(const VectorField& v) const {
    VectorField r = bochner_laplacian(v);
    r.comps -= (grid->d - 1) * v.comps;
    return r;
  }

  // Covariant divergence of a rank-2 tensor, contracting the second slot.
  VectorField div_tensor(const TensorField& T) const {
    const ManifoldGrid& g = *grid;
    const int n = g.n_nodes();
    VectorField out = VectorField::zero(g);
    if (g.d == 2) {
      Vec t11 = T.comps.segment(0, n), t12 = T.comps.segment(n, n);
      Vec t21 = T.comps.segment(2 * n, n), t22 = T.comps.segment(3 * n, n);
      out.comps.segment(0, n) =
          dtau_s * t11 + dphi * t12 + coth.cwiseProduct(t11 - t22);
      out.comps.segment(n, n) =
          dtau_s * t21 + dphi * t22 + coth.cwiseProduct(t12 + t21);
    } else {
      Vec t11 = T.comps.segment(0, n);
      Vec t22 = T.comps.segment(4 * n, n), t33 = T.comps.segment(8 * n, n);
      out.comps = dtau_s * t11 + coth.cwiseProduct(2.0 * t11 - t22 - t33);
    }
    return out;
  }

  TensorField outer(const VectorField& u, const VectorField& v) const {
    const ManifoldGrid& g = *grid;
    const int n = g.n_nodes();
    TensorField T = TensorField::zero(g);
    const int nc = VectorField::n_comp(g);
    for (int r = 0; r < nc; ++r)
      for (int c = 0; c < nc; ++c)
        T.comps.segment((r * g.d + c) * n, n) =
            u.comps.segment(r * n, n).cwiseProduct(v.comps.segment(c * n, n));
    return T;
  }

  VectorField scalar_times_vector(const ScalarField& f, const VectorField& v) const {
    const int n = grid->n_nodes();
    VectorField out = VectorField::zero(*grid);
    for (int c = 0; c < VectorField::n_comp(*grid); ++c)
      out.comps.segment(c * n, n) = f.values.cwiseProduct(v.comps.segment(c * n, n));
    return out;
  }

  double weighted_dot(const Vec& a, const Vec& b) const {
    const int n = grid->n_nodes();
    double acc = 0.0;
    for (int c = 0; c * n < a.size(); ++c)
      acc += (a.segment(c * n, n).cwiseProduct(b.segment(c * n, n)).cwiseProduct(grid->weights)).sum();
    return acc;
  }
};

}  // namespace hypbq
