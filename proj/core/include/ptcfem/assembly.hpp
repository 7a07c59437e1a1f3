#ifndef PTCFEM_ASSEMBLY_HPP
#define PTCFEM_ASSEMBLY_HPP

#include "ptcfem/mesh.hpp"
#include "ptcfem/problem.hpp"
#include "ptcfem/sparse.hpp"

#include <array>
#include <span>
#include <vector>

namespace ptcfem {

/// Nodal values of a continuous piecewise-linear function, indexed by mesh
/// vertex. Solver iterates keep boundary entries at zero.
using DiscreteField = std::vector<double>;

/// Numbering of the free (interior) vertices. Dirichlet vertices are
/// eliminated and map to -1.
struct DofMap {
  std::vector<int> vertex_to_dof;
  std::vector<int> dof_to_vertex;

  int size() const noexcept { return static_cast<int>(dof_to_vertex.size()); }
};

DofMap make_dof_map(const Mesh& mesh);

/// P1 Lagrange assembly on a fixed mesh. Precomputes element geometry and
/// the vertex-adjacency sparsity pattern over free vertices; the mesh must
/// outlive the assembler. Element contributions are summed in element order,
/// so results are deterministic.
class Assembler {
public:
  explicit Assembler(const Mesh& mesh);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const DofMap& dofs() const noexcept { return dofs_; }
  int num_dofs() const noexcept { return dofs_.size(); }

  /// Entries B(u, phi_i) - (f, phi_i) for every free vertex i.
  Vector residual(std::span<const double> u, const ProblemSpec& problem) const;
  /// Entries B'(u; phi_j, phi_i).
  SparseMatrix jacobian(std::span<const double> u, const ProblemSpec& problem) const;
  /// Entries (grad phi_j, grad phi_i).
  SparseMatrix laplacian() const;

  /// Squared L2 norm over each edge of the normal-flux jump of kappa(u) grad u;
  /// zero on boundary edges. Indexed by mesh edge.
  std::vector<double> edge_jumps(std::span<const double> u, const ProblemSpec& problem) const;

  /// Gradient of u on element t.
  Vec2 gradient(int t, std::span<const double> u) const;
  /// Gradients of the three barycentric coordinates of element t.
  const std::array<Vec2, 3>& shape_gradients(int t) const { return grads_[t]; }

  DiscreteField to_nodal(std::span<const double> free_values) const;
  Vector to_free(std::span<const double> nodal) const;

private:
  void check_field(std::span<const double> u) const;

  const Mesh* mesh_;
  DofMap dofs_;
  std::vector<std::array<Vec2, 3>> grads_;
  SparseMatrix pattern_;
  std::vector<std::array<int, 9>> slots_;
};

Vector assemble_residual(const Mesh& mesh, std::span<const double> u, const ProblemSpec& problem);
SparseMatrix assemble_jacobian(const Mesh& mesh, std::span<const double> u, const ProblemSpec& problem);
SparseMatrix assemble_laplacian(const Mesh& mesh);

/// (|u - u*|_0^2 + |grad(u - u*)|_0^2)^(1/2) by degree-4 quadrature. Throws
/// UnsupportedOperationError when the problem has no exact solution.
double h1_error(const Mesh& mesh, std::span<const double> u, const ProblemSpec& problem);

/// Per local edge of t (edge i opposite vertex i), the squared L2 edge
/// integral of the jump [kappa(u) grad u . n]; zero on boundary edges.
std::array<double, 3> edge_jump(const Mesh& mesh, std::span<const double> u, const ProblemSpec& problem, int t);

} // namespace ptcfem

#endif // PTCFEM_ASSEMBLY_HPP
