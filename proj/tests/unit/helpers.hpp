#ifndef PTCFEM_TEST_HELPERS_HPP
#define PTCFEM_TEST_HELPERS_HPP

#include "ptcfem/assembly.hpp"
#include "ptcfem/mesh.hpp"
#include "ptcfem/sparse.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace testing {

inline Eigen::MatrixXd dense(const ptcfem::SparseMatrix& A) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k)
      M(i, A.col_idx()[k]) += A.values()[k];
  return M;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Random sparse matrix with roughly `density` fill plus a dominant diagonal
/// of the given size.
inline ptcfem::SparseMatrix random_sparse(int n, double density, double diagonal, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_real_distribution<double> P(0.0, 1.0);
  std::vector<ptcfem::Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, diagonal + U(rng)});
    for (int j = 0; j < n; ++j)
      if (i != j && P(rng) < density)
        t.push_back({i, j, U(rng)});
  }
  return ptcfem::SparseMatrix::from_triplets(n, n, std::move(t));
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v)
    x = U(rng);
  return v;
}

/// Nodal field with random interior values and zero boundary values.
inline ptcfem::DiscreteField random_field(const ptcfem::Mesh& mesh, std::mt19937& rng, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  ptcfem::DiscreteField u(mesh.num_vertices(), 0.0);
  for (std::size_t v = 0; v < u.size(); ++v)
    if (!mesh.is_boundary(static_cast<int>(v)))
      u[v] = U(rng);
  return u;
}

/// A few rounds of random bisection starting from a structured mesh.
inline ptcfem::Mesh randomly_refined(int n, ptcfem::SquareSplit split, int rounds, double fraction,
                                     std::mt19937& rng) {
  ptcfem::Mesh mesh = ptcfem::unit_square_mesh(n, split);
  std::uniform_real_distribution<double> P(0.0, 1.0);
  for (int r = 0; r < rounds; ++r) {
    std::vector<int> marked;
    for (int t = 0; t < static_cast<int>(mesh.num_elements()); ++t)
      if (P(rng) < fraction)
        marked.push_back(t);
    if (marked.empty())
      marked.push_back(0);
    mesh = ptcfem::refine(mesh, marked).mesh;
  }
  return mesh;
}

} // namespace testing

#endif
