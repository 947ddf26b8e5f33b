#include "sdms/linalg.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <suitesparse/umfpack.h>

namespace sdms {

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx,
                           std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {
  if (static_cast<int>(row_ptr_.size()) != rows_ + 1 || col_idx_.size() != values_.size()) {
    throw SolverError("SparseMatrix: inconsistent CSR arrays");
  }
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<int> rp(n + 1), ci(n);
  std::iota(rp.begin(), rp.end(), 0);
  std::iota(ci.begin(), ci.end(), 0);
  return SparseMatrix(n, n, std::move(rp), std::move(ci), std::vector<double>(n, 1.0));
}

double SparseMatrix::at(int r, int c) const {
  const auto begin = col_idx_.begin() + row_ptr_[r], end = col_idx_.begin() + row_ptr_[r + 1];
  const auto it = std::lower_bound(begin, end, c);
  return (it != end && *it == c) ? values_[it - col_idx_.begin()] : 0.0;
}

double* SparseMatrix::find(int r, int c) {
  const auto begin = col_idx_.begin() + row_ptr_[r], end = col_idx_.begin() + row_ptr_[r + 1];
  const auto it = std::lower_bound(begin, end, c);
  return (it != end && *it == c) ? &values_[it - col_idx_.begin()] : nullptr;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[col_idx_[k]];
    y[r] = s;
  }
}

Vector SparseMatrix::operator*(std::span<const double> x) const {
  Vector y(rows_);
  multiply(x, y);
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<int> rp(cols_ + 1, 0);
  for (int c : col_idx_) ++rp[c + 1];
  for (int c = 0; c < cols_; ++c) rp[c + 1] += rp[c];
  std::vector<int> ci(nnz());
  std::vector<double> v(nnz());
  std::vector<int> next(rp.begin(), rp.end() - 1);
  for (int r = 0; r < rows_; ++r) {
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const int dst = next[col_idx_[k]]++;
      ci[dst] = r;
      v[dst] = values_[k];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(rp), std::move(ci), std::move(v));
}

double SparseMatrix::norm_inf() const {
  double m = 0.0;
  for (int r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += std::abs(values_[k]);
    m = std::max(m, s);
  }
  return m;
}

double SparseMatrix::asymmetry() const {
  double m = 0.0;
  for (int r = 0; r < rows_; ++r) {
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) m = std::max(m, std::abs(values_[k] - at(col_idx_[k], r)));
  }
  return m;
}

void CooAccumulator::append(const CooAccumulator& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

SparseMatrix CooAccumulator::finalize() const {
  // Counting sort by row keeps insertion order; a stable sort by column within
  // each row then fixes the summation order.
  std::vector<int> rp(rows_ + 1, 0);
  for (const auto& e : entries_) {
    if (e.r < 0 || e.r >= rows_ || e.c < 0 || e.c >= cols_) throw SolverError("CooAccumulator: index out of range");
    ++rp[e.r + 1];
  }
  for (int r = 0; r < rows_; ++r) rp[r + 1] += rp[r];
  std::vector<int> order(entries_.size());
  std::vector<int> next(rp.begin(), rp.end() - 1);
  for (std::size_t k = 0; k < entries_.size(); ++k) order[next[entries_[k].r]++] = static_cast<int>(k);
  std::vector<int> out_rp(rows_ + 1, 0), out_ci;
  std::vector<double> out_v;
  out_ci.reserve(entries_.size());
  out_v.reserve(entries_.size());
  for (int r = 0; r < rows_; ++r) {
    auto first = order.begin() + rp[r], last = order.begin() + rp[r + 1];
    std::stable_sort(first, last, [&](int a, int b) { return entries_[a].c < entries_[b].c; });
    for (auto it = first; it != last;) {
      const int c = entries_[*it].c;
      double s = 0.0;
      for (; it != last && entries_[*it].c == c; ++it) s += entries_[*it].v;
      out_ci.push_back(c);
      out_v.push_back(s);
    }
    out_rp[r + 1] = static_cast<int>(out_ci.size());
  }
  return SparseMatrix(rows_, cols_, std::move(out_rp), std::move(out_ci), std::move(out_v));
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw SolverError("add: shape mismatch");
  std::vector<int> rp(a.rows() + 1, 0), ci;
  std::vector<double> v;
  ci.reserve(a.nnz() + b.nnz());
  v.reserve(a.nnz() + b.nnz());
  for (int r = 0; r < a.rows(); ++r) {
    int i = a.row_ptr()[r], ie = a.row_ptr()[r + 1], j = b.row_ptr()[r], je = b.row_ptr()[r + 1];
    while (i < ie || j < je) {
      const int ca = i < ie ? a.col_idx()[i] : a.cols();
      const int cb = j < je ? b.col_idx()[j] : b.cols();
      if (ca == cb) {
        ci.push_back(ca);
        v.push_back(alpha * a.values()[i++] + beta * b.values()[j++]);
      } else if (ca < cb) {
        ci.push_back(ca);
        v.push_back(alpha * a.values()[i++]);
      } else {
        ci.push_back(cb);
        v.push_back(beta * b.values()[j++]);
      }
    }
    rp[r + 1] = static_cast<int>(ci.size());
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(rp), std::move(ci), std::move(v));
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) throw SolverError("multiply: shape mismatch");
  std::vector<int> rp(a.rows() + 1, 0), ci;
  std::vector<double> v;
  std::vector<double> acc(b.cols(), 0.0);
  std::vector<int> mark(b.cols(), -1), cols;
  for (int r = 0; r < a.rows(); ++r) {
    cols.clear();
    for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
      const int m = a.col_idx()[k];
      const double av = a.values()[k];
      for (int q = b.row_ptr()[m]; q < b.row_ptr()[m + 1]; ++q) {
        const int c = b.col_idx()[q];
        if (mark[c] != r) {
          mark[c] = r;
          acc[c] = 0.0;
          cols.push_back(c);
        }
        acc[c] += av * b.values()[q];
      }
    }
    std::sort(cols.begin(), cols.end());
    for (int c : cols) {
      ci.push_back(c);
      v.push_back(acc[c]);
    }
    rp[r + 1] = static_cast<int>(ci.size());
  }
  return SparseMatrix(a.rows(), b.cols(), std::move(rp), std::move(ci), std::move(v));
}

void dirichlet_rhs(const SparseMatrix& a, Vector& rhs, const std::vector<bool>& mask, std::span<const double> values) {
  for (int r = 0; r < a.rows(); ++r) {
    if (mask[r]) continue;
    for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
      const int c = a.col_idx()[k];
      if (mask[c]) rhs[r] -= a.values()[k] * values[c];
    }
  }
  for (int r = 0; r < a.rows(); ++r) {
    if (mask[r]) rhs[r] = values[r];
  }
}

void apply_dirichlet(SparseMatrix& a, Vector& rhs, const std::vector<bool>& mask, std::span<const double> values) {
  dirichlet_rhs(a, rhs, mask, values);
  auto& v = a.values();
  for (int r = 0; r < a.rows(); ++r) {
    bool has_diag = false;
    for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
      const int c = a.col_idx()[k];
      if (mask[r]) {
        v[k] = (c == r) ? 1.0 : 0.0;
        has_diag |= (c == r);
      } else if (mask[c]) {
        v[k] = 0.0;
      }
    }
    if (mask[r] && !has_diag) throw SolverError("apply_dirichlet: constrained row " + std::to_string(r) + " has no diagonal");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

IterativeResult cg_solve(const SparseMatrix& a, std::span<const double> b, double tol, int max_iter,
                         const LinearOperator& preconditioner, std::span<const double> x0,
                         const std::function<void(std::span<const double>)>& on_iterate) {
  const std::size_t n = b.size();
  IterativeResult res;
  res.x.assign(n, 0.0);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), res.x.begin());
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(res.x.begin(), res.x.end(), 0.0);
    return res;
  }
  Vector r(n), z(n), p(n), q(n);
  a.multiply(res.x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  auto apply_prec = [&] {
    if (preconditioner) preconditioner(r, z);
    else z = r;
  };
  apply_prec();
  p = z;
  double rz = dot(r, z);
  double rnorm = norm2(r);
  int it = 0;
  while (rnorm > tol * bnorm) {
    if (it >= max_iter) {
      throw ConvergenceError("cg_solve: no convergence in " + std::to_string(max_iter) + " iterations", it,
                             rnorm / bnorm);
    }
    a.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) throw ConvergenceError("cg_solve: matrix is not positive definite", it, rnorm / bnorm);
    const double alpha = rz / pq;
    axpy(alpha, p, res.x);
    axpy(-alpha, q, r);
    ++it;
    if (on_iterate) on_iterate(res.x);
    rnorm = norm2(r);
    apply_prec();
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  res.iterations = it;
  res.relative_residual = rnorm / bnorm;
  return res;
}

IterativeResult gmres(const LinearOperator& op, std::span<const double> b, double tol, int max_iter, int restart) {
  const std::size_t n = b.size();
  IterativeResult res;
  res.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return res;
  Vector w(n), r(b.begin(), b.end());
  double beta = bnorm;
  int total = 0;
  while (true) {
    const int m = restart;
    std::vector<Vector> v;
    v.reserve(m + 1);
    std::vector<std::vector<double>> hcol;  // Hessenberg columns after rotation
    std::vector<double> cs, sn, g(m + 1, 0.0);
    g[0] = beta;
    v.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    int k = 0;
    for (; k < m && total < max_iter; ++k, ++total) {
      op(v[k], w);
      std::vector<double> h(k + 2, 0.0);
      for (int i = 0; i <= k; ++i) {  // modified Gram-Schmidt, twice for stability
        h[i] = dot(w, v[i]);
        axpy(-h[i], v[i], w);
      }
      for (int i = 0; i <= k; ++i) {
        const double c = dot(w, v[i]);
        h[i] += c;
        axpy(-c, v[i], w);
      }
      h[k + 1] = norm2(w);
      v.emplace_back(n);
      if (h[k + 1] > 0.0) {
        for (std::size_t i = 0; i < n; ++i) v[k + 1][i] = w[i] / h[k + 1];
      }
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * h[i] + sn[i] * h[i + 1];
        h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
        h[i] = t;
      }
      const double den = std::hypot(h[k], h[k + 1]);
      cs.push_back(den > 0.0 ? h[k] / den : 1.0);
      sn.push_back(den > 0.0 ? h[k + 1] / den : 0.0);
      h[k] = den;
      h[k + 1] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      hcol.push_back(h);
      if (std::abs(g[k + 1]) <= tol * bnorm) {
        ++k;
        ++total;
        break;
      }
    }
    // Back substitution.
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= hcol[j][i] * y[j];
      y[i] = s / hcol[i][i];
    }
    for (int j = 0; j < k; ++j) axpy(y[j], v[j], res.x);
    op(res.x, w);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
    beta = norm2(r);
    res.iterations = total;
    res.relative_residual = beta / bnorm;
    if (beta <= tol * bnorm * 1.0000001) return res;
    if (total >= max_iter) {
      throw ConvergenceError("gmres: no convergence in " + std::to_string(max_iter) + " iterations", total,
                             res.relative_residual);
    }
  }
}

// ---------------------------------------------------------------------------

SparseLu::SparseLu(const SparseMatrix& a) : n_(a.rows()) {
  if (a.rows() != a.cols()) throw SolverError("SparseLu: matrix is not square");
  const SparseMatrix t = a.transpose();  // CSR of A^T == CSC of A
  ap_ = t.row_ptr();
  ai_ = t.col_idx();
  ax_ = t.values();
  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
  void* symbolic = nullptr;
  int status = umfpack_di_symbolic(n_, n_, ap_.data(), ai_.data(), ax_.data(), &symbolic, control, info);
  if (status != UMFPACK_OK) throw SolverError("SparseLu: symbolic analysis failed, status " + std::to_string(status));
  status = umfpack_di_numeric(ap_.data(), ai_.data(), ax_.data(), symbolic, &numeric_, control, info);
  umfpack_di_free_symbolic(&symbolic);
  if (status == UMFPACK_ERROR_out_of_memory) throw SolverError("SparseLu: out of memory");
  if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix) {
    umfpack_di_free_numeric(&numeric_);
    throw SolverError("SparseLu: numeric factorization failed, status " + std::to_string(status));
  }
  pivot_ratio_ = info[UMFPACK_RCOND];
  if (status == UMFPACK_WARNING_singular_matrix || !(pivot_ratio_ >= kPivotThreshold)) {
    // Locate the smallest pivot and map it back to an original row.
    int lnz, unz, nr, nc, nz_udiag;
    umfpack_di_get_lunz(&lnz, &unz, &nr, &nc, &nz_udiag, numeric_);
    std::vector<int> p(n_), q(n_);
    std::vector<double> d(n_);
    int do_recip;
    std::vector<double> rs(n_);
    umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, p.data(), q.data(), d.data(),
                           &do_recip, rs.data(), numeric_);
    double dmax = 0.0;
    for (double x : d) dmax = std::max(dmax, std::abs(x));
    int worst = 0;
    for (int k = 0; k < n_; ++k) {
      if (std::abs(d[k]) < std::abs(d[worst])) worst = k;
      if (std::abs(d[k]) <= kPivotThreshold * dmax) {
        worst = k;
        break;
      }
    }
    umfpack_di_free_numeric(&numeric_);
    throw SingularMatrixError("SparseLu: matrix is singular (pivot ratio " + std::to_string(pivot_ratio_) +
                                  ") at row " + std::to_string(p[worst]),
                              p[worst]);
  }
}

SparseLu::~SparseLu() {
  if (numeric_) umfpack_di_free_numeric(&numeric_);
}

SparseLu::SparseLu(SparseLu&& o) noexcept
    : n_(o.n_), ap_(std::move(o.ap_)), ai_(std::move(o.ai_)), ax_(std::move(o.ax_)), numeric_(o.numeric_),
      pivot_ratio_(o.pivot_ratio_) {
  o.numeric_ = nullptr;
}

SparseLu& SparseLu::operator=(SparseLu&& o) noexcept {
  if (this != &o) {
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    n_ = o.n_;
    ap_ = std::move(o.ap_);
    ai_ = std::move(o.ai_);
    ax_ = std::move(o.ax_);
    numeric_ = o.numeric_;
    pivot_ratio_ = o.pivot_ratio_;
    o.numeric_ = nullptr;
  }
  return *this;
}

Vector SparseLu::solve(std::span<const double> b) const {
  if (static_cast<int>(b.size()) != n_) throw SolverError("SparseLu::solve: size mismatch");
  Vector x(n_);
  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
  control[UMFPACK_IRSTEP] = 2;
  const int status = umfpack_di_solve(UMFPACK_A, ap_.data(), ai_.data(), ax_.data(), x.data(), b.data(), numeric_,
                                      control, info);
  if (status != UMFPACK_OK) throw SolverError("SparseLu::solve failed, status " + std::to_string(status));
  return x;
}

std::vector<Vector> lu_solve(const SparseMatrix& a, const std::vector<Vector>& rhs) {
  const SparseLu lu(a);
  std::vector<Vector> out;
  out.reserve(rhs.size());
  for (const auto& b : rhs) out.push_back(lu.solve(b));
  return out;
}

// ---------------------------------------------------------------------------

struct SparseLdlt::Impl {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
};

SparseLdlt::SparseLdlt(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor>> view(
      a.rows(), a.cols(), static_cast<Eigen::Index>(a.nnz()), a.row_ptr().data(), a.col_idx().data(),
      a.values().data());
  const Eigen::SparseMatrix<double> csc = view;
  impl_->solver.compute(csc);
  if (impl_->solver.info() != Eigen::Success) throw SolverError("SparseLdlt: factorization failed");
}

SparseLdlt::~SparseLdlt() = default;
SparseLdlt::SparseLdlt(SparseLdlt&&) noexcept = default;
SparseLdlt& SparseLdlt::operator=(SparseLdlt&&) noexcept = default;

Vector SparseLdlt::solve(std::span<const double> b) const {
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::VectorXd x = impl_->solver.solve(bv);
  return Vector(x.data(), x.data() + x.size());
}

}  // namespace sdms
