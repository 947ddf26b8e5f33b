#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdms {

using Vector = std::vector<double>;

/// Compressed sparse row matrix. Column indices are sorted and unique in every row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx, std::vector<double> values);

  static SparseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Entry (r, c), zero when not stored.
  double at(int r, int c) const;
  /// Pointer to stored entry (r, c) or nullptr.
  double* find(int r, int c);

  void multiply(std::span<const double> x, std::span<double> y) const;
  Vector operator*(std::span<const double> x) const;
  SparseMatrix transpose() const;
  double norm_inf() const;
  /// max |a_ij - a_ji|.
  double asymmetry() const;

  bool operator==(const SparseMatrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

/// Triplet accumulator. finalize() sorts by (row, col, insertion order) and sums
/// duplicates in that order, so the result does not depend on how entries were batched.
class CooAccumulator {
 public:
  CooAccumulator(int rows, int cols) : rows_(rows), cols_(cols) {}
  void add(int r, int c, double v) { entries_.push_back({r, c, v}); }
  void reserve(std::size_t n) { entries_.reserve(n); }
  /// Appends another accumulator's entries after this one's.
  void append(const CooAccumulator& other);
  std::size_t size() const { return entries_.size(); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  SparseMatrix finalize() const;

 private:
  struct Entry {
    int r, c;
    double v;
  };
  int rows_, cols_;
  std::vector<Entry> entries_;
};

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0, double beta = 1.0);
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

/// Dirichlet elimination: rows and columns of constrained dofs are zeroed, the
/// diagonal set to one, rhs[d] = value[d], and column contributions moved to the rhs.
void apply_dirichlet(SparseMatrix& a, Vector& rhs, const std::vector<bool>& mask, std::span<const double> values);
/// Same elimination on a rhs only (matrix already reduced); `original` is the unreduced matrix.
void dirichlet_rhs(const SparseMatrix& original, Vector& rhs, const std::vector<bool>& mask, std::span<const double> values);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : SolverError(what), iterations(iterations), residual(residual) {}
  int iterations;
  double residual;
};

class SingularMatrixError : public SolverError {
 public:
  SingularMatrixError(const std::string& what, int row) : SolverError(what), row(row) {}
  int row;
};

struct IterativeResult {
  Vector x;
  int iterations = 0;
  double relative_residual = 0.0;
};

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Preconditioned conjugate gradients; stops when ||b - A x|| <= tol ||b||.
/// `on_iterate`, when set, sees every iterate (used by monotonicity tests).
IterativeResult cg_solve(const SparseMatrix& a, std::span<const double> b, double tol, int max_iter,
                         const LinearOperator& preconditioner = {}, std::span<const double> x0 = {},
                         const std::function<void(std::span<const double>)>& on_iterate = {});

/// Restarted GMRES for small dense-ish operators (interface problems).
IterativeResult gmres(const LinearOperator& op, std::span<const double> b, double tol, int max_iter, int restart = 60);

/// Sparse LU with partial pivoting (UMFPACK). Factor once, solve many.
class SparseLu {
 public:
  static constexpr double kPivotThreshold = 1e-14;

  explicit SparseLu(const SparseMatrix& a);
  ~SparseLu();
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;
  SparseLu(const SparseLu&) = delete;
  SparseLu& operator=(const SparseLu&) = delete;

  Vector solve(std::span<const double> b) const;
  int size() const { return n_; }
  /// min |U_ii| / max |U_ii| as reported by the factorization.
  double pivot_ratio() const { return pivot_ratio_; }

 private:
  int n_ = 0;
  std::vector<int> ap_, ai_;
  std::vector<double> ax_;
  void* numeric_ = nullptr;
  double pivot_ratio_ = 0.0;
};

/// Convenience: factor + solve each right-hand side.
std::vector<Vector> lu_solve(const SparseMatrix& a, const std::vector<Vector>& rhs);

/// Sparse LDL^T for symmetric positive definite systems.
class SparseLdlt {
 public:
  explicit SparseLdlt(const SparseMatrix& a);
  ~SparseLdlt();
  SparseLdlt(SparseLdlt&&) noexcept;
  SparseLdlt& operator=(SparseLdlt&&) noexcept;
  Vector solve(std::span<const double> b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sdms
