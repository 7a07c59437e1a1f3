#ifndef PTCFEM_MESH_HPP
#define PTCFEM_MESH_HPP

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace ptcfem {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Vertex indices of a triangle in counter-clockwise order.
using Triangle = std::array<int, 3>;

/// Sorted pair of vertex indices.
using Edge = std::array<int, 2>;

/// Conforming triangulation of a polygonal domain.
///
/// Local edge i of a triangle is the edge opposite its local vertex i. Every
/// element carries the local index of its refinement edge (newest-vertex
/// bisection) and its generation, the number of bisections that separate it
/// from the initial mesh. Boundary vertices are the endpoints of edges with a
/// single incident element.
///
/// The constructor checks positive orientation and that no edge is shared by
/// more than two elements; the object is immutable afterwards.
class Mesh {
public:
  Mesh() = default;
  Mesh(std::vector<Point> vertices, std::vector<Triangle> elements,
       std::vector<int> generation, std::vector<int> refinement_edge);

  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t num_elements() const noexcept { return elements_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  std::span<const Point> vertices() const noexcept { return vertices_; }
  std::span<const Triangle> elements() const noexcept { return elements_; }
  std::span<const int> generations() const noexcept { return generation_; }

  const Point& vertex(int v) const { return vertices_[v]; }
  const Triangle& element(int t) const { return elements_[t]; }
  int generation(int t) const { return generation_[t]; }
  int refinement_edge(int t) const { return refinement_edge_[t]; }
  bool is_boundary(int v) const { return boundary_[v] != 0; }

  const Edge& edge(int e) const { return edges_[e]; }
  /// Global edge indices of element t, ordered by local edge.
  const std::array<int, 3>& element_edges(int t) const { return element_edges_[t]; }
  /// The one or two elements incident to edge e; the second is -1 on the boundary.
  const std::array<int, 2>& edge_elements(int e) const { return edge_elements_[e]; }
  bool is_boundary_edge(int e) const { return edge_elements_[e][1] < 0; }
  /// Element across local edge `local_edge` of t, or -1.
  int neighbor(int t, int local_edge) const;

  double area(int t) const;
  /// Longest edge of t.
  double diameter(int t) const;
  double inradius(int t) const;
  double max_diameter() const;
  int min_generation() const;

private:
  void build_topology();

  std::vector<Point> vertices_;
  std::vector<Triangle> elements_;
  std::vector<int> generation_;
  std::vector<int> refinement_edge_;
  std::vector<char> boundary_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> element_edges_;
  std::vector<std::array<int, 2>> edge_elements_;
};

enum class SquareSplit {
  diagonal,   ///< two triangles per cell, cut lower-left to upper-right
  crisscross, ///< four triangles per cell around a center vertex
};

/// Structured triangulation of [0,1]^2 with n cells per side. Diagonal gives
/// 2n^2 elements, crisscross 4n^2. The refinement edge of every element is
/// the edge opposite its right angle.
Mesh unit_square_mesh(int n_per_side, SquareSplit split = SquareSplit::diagonal);

/// For every vertex of a refined mesh, the endpoints of the coarse edge it
/// bisects; vertices inherited from the coarse mesh map to {v, v}.
using Parentage = std::vector<Edge>;

struct RefineResult {
  Mesh mesh;
  Parentage parents;
};

/// Newest-vertex bisection of every marked element followed by conforming
/// closure. Throws MeshError for out-of-range indices or when the closure
/// does not terminate.
RefineResult refine(const Mesh& mesh, std::span<const int> marked);

/// Maps nodal values from `coarse` to the mesh produced from it by refine.
/// New vertices take the mean of their parent edge endpoints; boundary values
/// are set to zero.
std::vector<double> interpolate(const Mesh& coarse, const Mesh& fine, const Parentage& parents,
                                std::span<const double> values);

/// Longest edge length of element t. Throws std::out_of_range for an invalid index.
double element_diameter(const Mesh& mesh, int t);

/// Largest h_T / inradius over all elements.
double max_shape_ratio(const Mesh& mesh);

/// Plain-text mesh dump: "vertices N", "elements M", one "x y boundary"
/// line per vertex, one "v0 v1 v2 generation" line per element. Coordinates
/// carry 17 significant digits.
void write_mesh(std::ostream& os, const Mesh& mesh);

/// Nodal values, one per line, 17 significant digits.
void write_field(std::ostream& os, std::span<const double> values);

} // namespace ptcfem

#endif // PTCFEM_MESH_HPP
