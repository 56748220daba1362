#pragma once

// Kodaira-Hodge (Leray) projector P = I + grad (-Lap_g)^{-1} div.
// With div = -W^{-1} G^T W the composition is algebraically
// P = I - G (G^T W G)^{-1} G^T W, an exact orthogonal projector in the
// weighted inner product: it annihilates gradients, fixes the kernel of div
// and is idempotent up to solver roundoff. The SPD Poisson matrix G^T W G is
// factored once per grid (LDLT) and solves get two iterative-refinement
// passes.

#include "hypbq/operators.hpp"

#include <Eigen/SparseCholesky>
#include <memory>

namespace hypbq {

class Projector {
 public:
  explicit Projector(const DiffOps& ops) : ops_(&ops) {
    ldlt_.compute(ops.poisson);
    if (ldlt_.info() != Eigen::Success)
      throw std::runtime_error("Projector: Poisson factorization failed (singular stencil?)");
  }

  // Solves -Lap_g phi = rhs (homogeneous Dirichlet at tau_max).
  ScalarField poisson_solve(const ScalarField& rhs) const {
    Vec b = ops_->grid->weights.cwiseProduct(rhs.values);
    return {ops_->grid, refined_solve(b)};
  }

  VectorField leray_project(const VectorField& v) const {
    Vec b = SpMat(ops_->grad.transpose()) * weighted(v.comps);
    Vec x = refined_solve(b);
    VectorField out = v;
    out.comps -= ops_->grad * x;
    return out;
  }

  // Columnwise projection in the first (vector) slot: for each fixed second
  // index c the column T_{.c} is a vector field and gets projected. In the
  // d = 3 radial mode only the tau column is representable; transverse
  // diagonal entries pass through unchanged.
  TensorField project_tensor_columns(const TensorField& T) const {
    const ManifoldGrid& g = *ops_->grid;
    const int n = g.n_nodes();
    TensorField out = T;
    if (g.d == 2) {
      for (int c = 0; c < 2; ++c) {
        VectorField col = VectorField::zero(g);
        col.comps.segment(0, n) = T.comps.segment((0 * 2 + c) * n, n);
        col.comps.segment(n, n) = T.comps.segment((1 * 2 + c) * n, n);
        col = leray_project(col);
        out.comps.segment((0 * 2 + c) * n, n) = col.comps.segment(0, n);
        out.comps.segment((1 * 2 + c) * n, n) = col.comps.segment(n, n);
      }
    } else {
      VectorField col{&g, T.comps.segment(0, n)};
      out.comps.segment(0, n) = leray_project(col).comps;
    }
    return out;
  }

 private:
  Vec weighted(const Vec& v) const {
    const int n = ops_->grid->n_nodes();
    Vec r = v;
    for (int c = 0; c * n < v.size(); ++c)
      r.segment(c * n, n) = r.segment(c * n, n).cwiseProduct(ops_->grid->weights);
    return r;
  }

  Vec refined_solve(const Vec& b) const {
    Vec x = ldlt_.solve(b);
    for (int pass = 0; pass < 2; ++pass) {
      Vec r = b - ops_->poisson * x;
      x += ldlt_.solve(r);
    }
    return x;
  }

  const DiffOps* ops_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
};

}  // namespace hypbq
