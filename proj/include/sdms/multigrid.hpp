#pragma once

#include <memory>
#include <vector>

#include "sdms/elements.hpp"
#include "sdms/linalg.hpp"
#include "sdms/mesh.hpp"

namespace sdms {

/// Prolongation from the P1 space of `coarse` to the P1 space of its uniform
/// refinement `fine` (same rectangle and diagonal, fine.n() == 2 * coarse.n()).
SparseMatrix p1_prolongation(const TriMesh& coarse, const TriMesh& fine);

/// Embedding of P1 into continuous P2 on the same mesh.
SparseMatrix p1_to_p2(const P2DofMap& dofs);

/// Block-diagonal copy of `p` for `components` interleaved-by-block unknowns
/// ([c0 dofs, c1 dofs, ...]).
SparseMatrix block_diagonal(const SparseMatrix& p, int components);

/// Geometric multigrid V-cycle for an SPD matrix with Dirichlet rows eliminated.
/// Coarse operators are Galerkin products; the smoother is symmetric Gauss-Seidel,
/// so the cycle is a symmetric preconditioner.
class Multigrid {
 public:
  /// `prolongations[l]` maps level l+1 to level l; level 0 is `a`. `dirichlet` flags
  /// constrained rows of `a`; `coarse_dirichlet[l]` flags those of level l+1.
  Multigrid(SparseMatrix a, const std::vector<bool>& dirichlet, std::vector<SparseMatrix> prolongations,
            std::vector<std::vector<bool>> coarse_dirichlet, int smoothing_steps = 2);
  ~Multigrid();

  void vcycle(std::span<const double> b, std::span<double> x) const;
  LinearOperator as_preconditioner() const;
  const SparseMatrix& matrix() const { return levels_.front().a; }
  int num_levels() const { return static_cast<int>(levels_.size()); }

 private:
  struct Level {
    SparseMatrix a;
    SparseMatrix p, pt;  // p: next level -> this level
  };
  void cycle(std::size_t l, std::span<const double> b, std::span<double> x) const;

  std::vector<Level> levels_;
  std::unique_ptr<SparseLdlt> coarse_;
  int steps_;
};

/// Forward (or backward) Gauss-Seidel sweep on x.
void gauss_seidel(const SparseMatrix& a, std::span<const double> b, std::span<double> x, bool backward);

/// Restricts a coarse Dirichlet mask through vertex injection: coarse vertex (I, J)
/// is fine vertex (2I, 2J).
std::vector<bool> inject_mask(const TriMesh& coarse, const TriMesh& fine, const std::vector<bool>& fine_mask);

/// Geometric hierarchy for a structured mesh: halves N while it stays even and >= `min_n`.
std::vector<TriMesh> coarsening_hierarchy(const TriMesh& fine, int min_n);

}  // namespace sdms
