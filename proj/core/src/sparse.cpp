#include "ptcfem/sparse.hpp"

#include "ptcfem/error.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

namespace ptcfem {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok)
    throw DimensionError(what);
}

} // namespace

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx,
                           std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  require(rows_ >= 0 && cols_ >= 0, "negative matrix dimension");
  require(row_ptr_.size() == static_cast<std::size_t>(rows_) + 1, "row offsets do not match row count");
  require(row_ptr_.front() == 0 && static_cast<std::size_t>(row_ptr_.back()) == col_idx_.size(),
          "row offsets do not span the column indices");
  require(col_idx_.size() == values_.size(), "column and value arrays differ in length");
  for (int i = 0; i < rows_; ++i) {
    require(row_ptr_[i] <= row_ptr_[i + 1], "row offsets decrease");
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      require(col_idx_[k] >= 0 && col_idx_[k] < cols_, "column index out of range");
      require(k == row_ptr_[i] || col_idx_[k - 1] < col_idx_[k], "column indices not strictly increasing");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
  for (const auto& t : triplets)
    require(t.row >= 0 && t.row < rows && t.col >= 0 && t.col < cols, "triplet index out of range");
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<int> row_ptr(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<int> col_idx;
  std::vector<double> values;
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (!col_idx.empty() && k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      values.back() += t.value;
      continue;
    }
    col_idx.push_back(t.col);
    values.push_back(t.value);
    ++row_ptr[t.row + 1];
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<int> row_ptr(static_cast<std::size_t>(n) + 1);
  std::iota(row_ptr.begin(), row_ptr.end(), 0);
  std::vector<int> col_idx(static_cast<std::size_t>(n));
  std::iota(col_idx.begin(), col_idx.end(), 0);
  return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::zero(int rows, int cols) {
  return SparseMatrix(rows, cols, std::vector<int>(static_cast<std::size_t>(rows) + 1, 0), {}, {});
}

std::ptrdiff_t SparseMatrix::find(int i, int j) const {
  const auto first = col_idx_.begin() + row_ptr_[i];
  const auto last = col_idx_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j)
    return -1;
  return it - col_idx_.begin();
}

double SparseMatrix::at(int i, int j) const {
  const auto k = find(i, j);
  return k < 0 ? 0.0 : values_[k];
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_)
    m = std::max(m, std::abs(v));
  return m;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<int> row_ptr(static_cast<std::size_t>(cols_) + 1, 0);
  for (int c : col_idx_)
    ++row_ptr[c + 1];
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  std::vector<int> next(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<int> col_idx(values_.size());
  std::vector<double> values(values_.size());
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const int dst = next[col_idx_[k]]++;
      col_idx[dst] = i;
      values[dst] = values_[k];
    }
  return SparseMatrix(cols_, rows_, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix add_scaled(const SparseMatrix& A, const SparseMatrix& B, double a, double b) {
  require(A.rows() == B.rows() && A.cols() == B.cols(), "add_scaled: dimension mismatch");
  std::vector<int> row_ptr(static_cast<std::size_t>(A.rows()) + 1, 0);
  std::vector<int> col_idx;
  std::vector<double> values;
  col_idx.reserve(std::max(A.nnz(), B.nnz()));
  values.reserve(col_idx.capacity());
  const auto ap = A.row_ptr(), bp = B.row_ptr();
  const auto ac = A.col_idx(), bc = B.col_idx();
  const auto av = A.values(), bv = B.values();
  for (int i = 0; i < A.rows(); ++i) {
    int ka = ap[i], kb = bp[i];
    while (ka < ap[i + 1] || kb < bp[i + 1]) {
      const int ca = ka < ap[i + 1] ? ac[ka] : A.cols();
      const int cb = kb < bp[i + 1] ? bc[kb] : B.cols();
      if (ca == cb) {
        col_idx.push_back(ca);
        values.push_back(a * av[ka++] + b * bv[kb++]);
      } else if (ca < cb) {
        col_idx.push_back(ca);
        values.push_back(a * av[ka++]);
      } else {
        col_idx.push_back(cb);
        values.push_back(b * bv[kb++]);
      }
    }
    row_ptr[i + 1] = static_cast<int>(col_idx.size());
  }
  return SparseMatrix(A.rows(), A.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

Vector matvec(const SparseMatrix& A, std::span<const double> x) {
  require(x.size() == static_cast<std::size_t>(A.cols()), "matvec: dimension mismatch");
  Vector y(static_cast<std::size_t>(A.rows()), 0.0);
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto va = A.values();
  for (int i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (int k = rp[i]; k < rp[i + 1]; ++k)
      s += va[k] * x[ci[k]];
    y[i] = s;
  }
  return y;
}

Vector transpose_apply(const SparseMatrix& A, std::span<const double> v) {
  require(v.size() == static_cast<std::size_t>(A.rows()), "transpose_apply: dimension mismatch");
  Vector y(static_cast<std::size_t>(A.cols()), 0.0);
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto va = A.values();
  for (int i = 0; i < A.rows(); ++i)
    for (int k = rp[i]; k < rp[i + 1]; ++k)
      y[ci[k]] += va[k] * v[i];
  return y;
}

SparseMatrix multiply(const SparseMatrix& A, const SparseMatrix& B) {
  require(A.cols() == B.rows(), "multiply: dimension mismatch");
  const auto ap = A.row_ptr(), bp = B.row_ptr();
  const auto ac = A.col_idx(), bc = B.col_idx();
  const auto av = A.values(), bv = B.values();
  std::vector<int> row_ptr(static_cast<std::size_t>(A.rows()) + 1, 0);
  std::vector<int> col_idx;
  std::vector<double> values;
  std::vector<double> acc(static_cast<std::size_t>(B.cols()), 0.0);
  std::vector<int> seen(static_cast<std::size_t>(B.cols()), -1);
  std::vector<int> cols;
  for (int i = 0; i < A.rows(); ++i) {
    cols.clear();
    for (int ka = ap[i]; ka < ap[i + 1]; ++ka) {
      const int j = ac[ka];
      for (int kb = bp[j]; kb < bp[j + 1]; ++kb) {
        const int c = bc[kb];
        if (seen[c] != i) {
          seen[c] = i;
          acc[c] = 0.0;
          cols.push_back(c);
        }
        acc[c] += av[ka] * bv[kb];
      }
    }
    std::sort(cols.begin(), cols.end());
    for (int c : cols) {
      col_idx.push_back(c);
      values.push_back(acc[c]);
    }
    row_ptr[i + 1] = static_cast<int>(col_idx.size());
  }
  return SparseMatrix(A.rows(), B.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix transpose_product(const SparseMatrix& A) { return multiply(A.transpose(), A); }

struct LuSolver::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor>, Eigen::COLAMDOrdering<int>> lu;
  int n = 0;
};

LuSolver::LuSolver(const SparseMatrix& A) : impl_(std::make_unique<Impl>()) {
  require(A.rows() == A.cols(), "direct solve needs a square matrix");
  impl_->n = A.rows();
  if (A.rows() == 0)
    return;
  Eigen::SparseMatrix<double, Eigen::ColMajor> M(A.rows(), A.cols());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(A.nnz());
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto va = A.values();
  for (int i = 0; i < A.rows(); ++i)
    for (int k = rp[i]; k < rp[i + 1]; ++k)
      entries.emplace_back(i, ci[k], va[k]);
  M.setFromTriplets(entries.begin(), entries.end());
  M.makeCompressed();

  impl_->lu.analyzePattern(M);
  impl_->lu.factorize(M);
  if (impl_->lu.info() != Eigen::Success) {
    const std::string msg = impl_->lu.lastErrorMessage();
    std::ptrdiff_t pivot = -1;
    if (const auto pos = msg.find_last_of(' '); pos != std::string::npos) {
      try {
        pivot = std::stol(msg.substr(pos + 1)) - 1;
      } catch (const std::exception&) {
      }
    }
    throw SingularMatrixError("singular matrix (" + msg + ")", pivot);
  }

  const double threshold = 1e-14 * A.max_abs();
  const auto& L = impl_->lu.matrixL().m_mapL;
  using Supernodal = std::decay_t<decltype(L)>;
  for (Eigen::Index j = 0; j < L.cols(); ++j) {
    double diag = 0.0;
    for (typename Supernodal::InnerIterator it(L, j); it; ++it)
      if (it.index() == j) {
        diag = it.value();
        break;
      }
    if (!(std::abs(diag) > threshold))
      throw SingularMatrixError("zero pivot at elimination step " + std::to_string(j), j);
  }
}

LuSolver::~LuSolver() = default;
LuSolver::LuSolver(LuSolver&&) noexcept = default;
LuSolver& LuSolver::operator=(LuSolver&&) noexcept = default;

Vector LuSolver::solve(std::span<const double> rhs) const {
  require(rhs.size() == static_cast<std::size_t>(impl_->n), "direct solve: right-hand side dimension mismatch");
  if (impl_->n == 0)
    return {};
  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), impl_->n);
  Eigen::VectorXd x = impl_->lu.solve(b);
  return Vector(x.data(), x.data() + x.size());
}

Vector direct_solve(const SparseMatrix& A, std::span<const double> rhs) { return LuSolver(A).solve(rhs); }

void write_triplets(std::ostream& os, const SparseMatrix& A) {
  const auto old_precision = os.precision(17);
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto va = A.values();
  for (int i = 0; i < A.rows(); ++i)
    for (int k = rp[i]; k < rp[i + 1]; ++k)
      os << i + 1 << ' ' << ci[k] + 1 << ' ' << va[k] << '\n';
  os.precision(old_precision);
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: dimension mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

} // namespace ptcfem
