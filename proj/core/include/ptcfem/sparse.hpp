#ifndef PTCFEM_SPARSE_HPP
#define PTCFEM_SPARSE_HPP

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace ptcfem {

using Vector = std::vector<double>;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed-row sparse matrix. Column indices are strictly increasing
/// within each row; explicit zeros may be stored.
class SparseMatrix {
public:
  SparseMatrix() = default;
  /// Validates offsets and column ordering; throws DimensionError.
  SparseMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx,
               std::vector<double> values);

  /// Duplicates are summed.
  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);
  static SparseMatrix identity(int n);
  static SparseMatrix zero(int rows, int cols);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const int> row_ptr() const noexcept { return row_ptr_; }
  std::span<const int> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// Entry (i, j); zero when not stored.
  double at(int i, int j) const;
  /// Position of (i, j) in values(), or -1.
  std::ptrdiff_t find(int i, int j) const;
  double max_abs() const;
  SparseMatrix transpose() const;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

/// a*A + b*B over the union of both sparsity patterns.
SparseMatrix add_scaled(const SparseMatrix& A, const SparseMatrix& B, double a, double b);
Vector matvec(const SparseMatrix& A, std::span<const double> x);
/// A^T v.
Vector transpose_apply(const SparseMatrix& A, std::span<const double> v);
/// A B.
SparseMatrix multiply(const SparseMatrix& A, const SparseMatrix& B);
/// A^T A.
SparseMatrix transpose_product(const SparseMatrix& A);

/// Sparse LU factorization with partial pivoting. A pivot whose magnitude is
/// at most 1e-14 * max|A_ij| raises SingularMatrixError.
class LuSolver {
public:
  explicit LuSolver(const SparseMatrix& A);
  ~LuSolver();
  LuSolver(LuSolver&&) noexcept;
  LuSolver& operator=(LuSolver&&) noexcept;

  Vector solve(std::span<const double> rhs) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Vector direct_solve(const SparseMatrix& A, std::span<const double> rhs);

/// One "i j value" line per stored entry, 1-based indices.
void write_triplets(std::ostream& os, const SparseMatrix& A);

double norm2(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

} // namespace ptcfem

#endif // PTCFEM_SPARSE_HPP
