#include "sdms/multigrid.hpp"

#include <cmath>

namespace sdms {

namespace {

SparseMatrix drop_constrained(const SparseMatrix& p, const std::vector<bool>& rows, const std::vector<bool>& cols) {
  CooAccumulator c(p.rows(), p.cols());
  c.reserve(p.nnz());
  for (int r = 0; r < p.rows(); ++r) {
    if (rows[r]) continue;
    for (int k = p.row_ptr()[r]; k < p.row_ptr()[r + 1]; ++k)
      if (!cols[p.col_idx()[k]]) c.add(r, p.col_idx()[k], p.values()[k]);
  }
  return c.finalize();
}

SparseMatrix with_unit_rows(const SparseMatrix& a, const std::vector<bool>& mask) {
  CooAccumulator d(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r)
    if (mask[r]) d.add(r, r, 1.0);
  return add(a, d.finalize());
}

}  // namespace

SparseMatrix p1_prolongation(const TriMesh& coarse, const TriMesh& fine) {
  const int nc = coarse.n(), nf = fine.n();
  if (nf != 2 * nc || !(coarse.rect() == fine.rect()) || coarse.diagonal() != fine.diagonal())
    throw MeshError("p1_prolongation: meshes are not a uniform refinement pair");
  auto cid = [nc](int i, int j) { return j * (nc + 1) + i; };
  CooAccumulator p(static_cast<int>(fine.num_vertices()), static_cast<int>(coarse.num_vertices()));
  for (int j = 0; j <= nf; ++j)
    for (int i = 0; i <= nf; ++i) {
      const int r = j * (nf + 1) + i;
      const int I = i / 2, J = j / 2;
      if (i % 2 == 0 && j % 2 == 0) {
        p.add(r, cid(I, J), 1.0);
      } else if (j % 2 == 0) {
        p.add(r, cid(I, J), 0.5);
        p.add(r, cid(I + 1, J), 0.5);
      } else if (i % 2 == 0) {
        p.add(r, cid(I, J), 0.5);
        p.add(r, cid(I, J + 1), 0.5);
      } else if (fine.diagonal() == Diagonal::NE) {
        p.add(r, cid(I, J), 0.5);
        p.add(r, cid(I + 1, J + 1), 0.5);
      } else {
        p.add(r, cid(I + 1, J), 0.5);
        p.add(r, cid(I, J + 1), 0.5);
      }
    }
  return p.finalize();
}

SparseMatrix p1_to_p2(const P2DofMap& dofs) {
  CooAccumulator p(dofs.num_dofs, dofs.num_vertices);
  std::vector<bool> done(dofs.num_dofs, false);
  for (int v = 0; v < dofs.num_vertices; ++v) {
    p.add(v, v, 1.0);
    done[v] = true;
  }
  for (const auto& c : dofs.cell)
    for (int e = 0; e < 3; ++e) {
      const int d = c[3 + e];
      if (done[d]) continue;
      done[d] = true;
      p.add(d, c[kP2Edges[e][0]], 0.5);
      p.add(d, c[kP2Edges[e][1]], 0.5);
    }
  return p.finalize();
}

SparseMatrix block_diagonal(const SparseMatrix& p, int components) {
  CooAccumulator b(components * p.rows(), components * p.cols());
  b.reserve(components * p.nnz());
  for (int c = 0; c < components; ++c)
    for (int r = 0; r < p.rows(); ++r)
      for (int k = p.row_ptr()[r]; k < p.row_ptr()[r + 1]; ++k)
        b.add(c * p.rows() + r, c * p.cols() + p.col_idx()[k], p.values()[k]);
  return b.finalize();
}

std::vector<bool> inject_mask(const TriMesh& coarse, const TriMesh& fine, const std::vector<bool>& fine_mask) {
  const int nc = coarse.n(), nf = fine.n();
  std::vector<bool> m(coarse.num_vertices());
  for (int J = 0; J <= nc; ++J)
    for (int I = 0; I <= nc; ++I) m[J * (nc + 1) + I] = fine_mask[2 * J * (nf + 1) + 2 * I];
  return m;
}

std::vector<TriMesh> coarsening_hierarchy(const TriMesh& fine, int min_n) {
  const auto& be = fine.boundary_edges();
  const int n = fine.n();
  const SideMarkers sides{be[0].marker, be[n].marker, be[2 * n].marker, be[3 * n].marker};
  std::vector<TriMesh> out;
  for (int k = n; k % 2 == 0 && k / 2 >= min_n; k /= 2) out.push_back(build_structured(k / 2, fine.rect(), sides, fine.diagonal()));
  return out;
}

void gauss_seidel(const SparseMatrix& a, std::span<const double> b, std::span<double> x, bool backward) {
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_idx();
  const auto& v = a.values();
  const int n = a.rows();
  auto row = [&](int r) {
    double s = b[r], d = 0.0;
    for (int k = rp[r]; k < rp[r + 1]; ++k) {
      const int c = ci[k];
      if (c == r)
        d = v[k];
      else
        s -= v[k] * x[c];
    }
    x[r] = s / d;
  };
  if (backward)
    for (int r = n - 1; r >= 0; --r) row(r);
  else
    for (int r = 0; r < n; ++r) row(r);
}

Multigrid::Multigrid(SparseMatrix a, const std::vector<bool>& dirichlet, std::vector<SparseMatrix> prolongations,
                     std::vector<std::vector<bool>> coarse_dirichlet, int smoothing_steps)
    : steps_(smoothing_steps) {
  if (prolongations.size() != coarse_dirichlet.size()) throw std::invalid_argument("Multigrid: one mask per coarse level");
  levels_.push_back({std::move(a), {}, {}});
  const std::vector<bool>* fine_mask = &dirichlet;
  for (std::size_t l = 0; l < prolongations.size(); ++l) {
    auto& lev = levels_.back();
    lev.p = drop_constrained(prolongations[l], *fine_mask, coarse_dirichlet[l]);
    lev.pt = lev.p.transpose();
    SparseMatrix ac = multiply(lev.pt, multiply(lev.a, lev.p));
    levels_.push_back({with_unit_rows(ac, coarse_dirichlet[l]), {}, {}});
    fine_mask = &coarse_dirichlet[l];
  }
  coarse_ = std::make_unique<SparseLdlt>(levels_.back().a);
}

Multigrid::~Multigrid() = default;

void Multigrid::cycle(std::size_t l, std::span<const double> b, std::span<double> x) const {
  const auto& lev = levels_[l];
  if (l + 1 == levels_.size()) {
    const Vector s = coarse_->solve(b);
    std::copy(s.begin(), s.end(), x.begin());
    return;
  }
  std::fill(x.begin(), x.end(), 0.0);
  for (int s = 0; s < steps_; ++s) gauss_seidel(lev.a, b, x, false);
  Vector r(b.size());
  lev.a.multiply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const Vector bc = lev.pt * r;
  Vector xc(bc.size());
  cycle(l + 1, bc, xc);
  const Vector e = lev.p * xc;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += e[i];
  for (int s = 0; s < steps_; ++s) gauss_seidel(lev.a, b, x, true);
}

void Multigrid::vcycle(std::span<const double> b, std::span<double> x) const { cycle(0, b, x); }

LinearOperator Multigrid::as_preconditioner() const {
  return [this](std::span<const double> b, std::span<double> x) { vcycle(b, x); };
}

}  // namespace sdms
