#include "ptcfem/mesh.hpp"

#include "ptcfem/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace ptcfem {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b)
    std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double distance(const Point& a, const Point& b) { return std::hypot(b.x - a.x, b.y - a.y); }

} // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> elements, std::vector<int> generation,
           std::vector<int> refinement_edge)
    : vertices_(std::move(vertices)), elements_(std::move(elements)), generation_(std::move(generation)),
      refinement_edge_(std::move(refinement_edge)) {
  if (generation_.size() != elements_.size() || refinement_edge_.size() != elements_.size())
    throw MeshError("per-element metadata does not match the element count");
  const int nv = static_cast<int>(vertices_.size());
  for (std::size_t t = 0; t < elements_.size(); ++t) {
    for (int v : elements_[t])
      if (v < 0 || v >= nv)
        throw MeshError("element " + std::to_string(t) + " references vertex " + std::to_string(v));
    if (refinement_edge_[t] < 0 || refinement_edge_[t] > 2)
      throw MeshError("element " + std::to_string(t) + " has no valid refinement edge");
    if (generation_[t] < 0)
      throw MeshError("element " + std::to_string(t) + " has negative generation");
    const auto& e = elements_[t];
    if (!(signed_area(vertices_[e[0]], vertices_[e[1]], vertices_[e[2]]) > 0.0))
      throw MeshError("element " + std::to_string(t) + " is not positively oriented");
  }
  build_topology();
}

void Mesh::build_topology() {
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(elements_.size() * 2);
  element_edges_.resize(elements_.size());
  for (std::size_t t = 0; t < elements_.size(); ++t) {
    const auto& tri = elements_[t];
    for (int i = 0; i < 3; ++i) {
      const int a = tri[(i + 1) % 3];
      const int b = tri[(i + 2) % 3];
      auto [it, inserted] = index.try_emplace(edge_key(a, b), static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back({std::min(a, b), std::max(a, b)});
        edge_elements_.push_back({static_cast<int>(t), -1});
      } else {
        auto& adj = edge_elements_[it->second];
        if (adj[1] >= 0)
          throw MeshError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                          ") is shared by more than two elements");
        adj[1] = static_cast<int>(t);
      }
      element_edges_[t][i] = it->second;
    }
  }
  boundary_.assign(vertices_.size(), 0);
  for (std::size_t e = 0; e < edges_.size(); ++e)
    if (edge_elements_[e][1] < 0) {
      boundary_[edges_[e][0]] = 1;
      boundary_[edges_[e][1]] = 1;
    }
}

int Mesh::neighbor(int t, int local_edge) const {
  const auto& adj = edge_elements_[element_edges_[t][local_edge]];
  return adj[0] == t ? adj[1] : adj[0];
}

double Mesh::area(int t) const {
  const auto& e = elements_[t];
  return signed_area(vertices_[e[0]], vertices_[e[1]], vertices_[e[2]]);
}

double Mesh::diameter(int t) const {
  const auto& e = elements_[t];
  const Point& a = vertices_[e[0]];
  const Point& b = vertices_[e[1]];
  const Point& c = vertices_[e[2]];
  return std::max({distance(a, b), distance(b, c), distance(c, a)});
}

double Mesh::inradius(int t) const {
  const auto& e = elements_[t];
  const Point& a = vertices_[e[0]];
  const Point& b = vertices_[e[1]];
  const Point& c = vertices_[e[2]];
  const double s = 0.5 * (distance(a, b) + distance(b, c) + distance(c, a));
  return area(t) / s;
}

double Mesh::max_diameter() const {
  double h = 0.0;
  for (std::size_t t = 0; t < elements_.size(); ++t)
    h = std::max(h, diameter(static_cast<int>(t)));
  return h;
}

int Mesh::min_generation() const {
  if (generation_.empty())
    return 0;
  return *std::min_element(generation_.begin(), generation_.end());
}

Mesh unit_square_mesh(int n, SquareSplit split) {
  if (n < 1)
    throw MeshError("unit_square_mesh needs at least one cell per side");
  const double h = 1.0 / n;
  std::vector<Point> vertices;
  auto grid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices.push_back({i * h, j * h});

  std::vector<Triangle> elements;
  std::vector<int> refinement_edge;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int sw = grid(i, j), se = grid(i + 1, j), ne = grid(i + 1, j + 1), nw = grid(i, j + 1);
      if (split == SquareSplit::diagonal) {
        // Right angles at se and nw; the shared diagonal is the refinement edge.
        elements.push_back({se, ne, sw});
        elements.push_back({nw, sw, ne});
        refinement_edge.push_back(0);
        refinement_edge.push_back(0);
      } else {
        const int c = static_cast<int>(vertices.size());
        vertices.push_back({(i + 0.5) * h, (j + 0.5) * h});
        elements.push_back({c, sw, se});
        elements.push_back({c, se, ne});
        elements.push_back({c, ne, nw});
        elements.push_back({c, nw, sw});
        refinement_edge.insert(refinement_edge.end(), 4, 0);
      }
    }
  }
  std::vector<int> generation(elements.size(), 0);
  return Mesh(std::move(vertices), std::move(elements), std::move(generation), std::move(refinement_edge));
}

RefineResult refine(const Mesh& mesh, std::span<const int> marked) {
  const int ne = static_cast<int>(mesh.num_elements());
  std::vector<char> edge_marked(mesh.num_edges(), 0);
  std::deque<int> queue;
  for (int t : marked) {
    if (t < 0 || t >= ne)
      throw MeshError("marked element " + std::to_string(t) + " is out of range");
    const int e = mesh.element_edges(t)[mesh.refinement_edge(t)];
    if (!edge_marked[e]) {
      edge_marked[e] = 1;
      for (int adj : mesh.edge_elements(e))
        if (adj >= 0)
          queue.push_back(adj);
    }
  }

  // Closure: an element with any marked edge must also bisect its refinement edge.
  const std::size_t bound = 2 * mesh.num_edges() + mesh.num_elements() + 16;
  std::size_t visits = 0;
  while (!queue.empty()) {
    if (++visits > bound)
      throw MeshError("refinement closure exceeded its depth bound");
    const int t = queue.front();
    queue.pop_front();
    const auto& edges = mesh.element_edges(t);
    const int ref = edges[mesh.refinement_edge(t)];
    if (edge_marked[ref])
      continue;
    if (edge_marked[edges[0]] || edge_marked[edges[1]] || edge_marked[edges[2]]) {
      edge_marked[ref] = 1;
      for (int adj : mesh.edge_elements(ref))
        if (adj >= 0 && adj != t)
          queue.push_back(adj);
    }
  }

  std::vector<Point> vertices(mesh.vertices().begin(), mesh.vertices().end());
  Parentage parents(vertices.size());
  for (std::size_t v = 0; v < parents.size(); ++v)
    parents[v] = {static_cast<int>(v), static_cast<int>(v)};
  std::unordered_map<std::uint64_t, int> midpoint;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (!edge_marked[e])
      continue;
    const auto [a, b] = mesh.edge(static_cast<int>(e));
    const Point& pa = mesh.vertex(a);
    const Point& pb = mesh.vertex(b);
    midpoint.emplace(edge_key(a, b), static_cast<int>(vertices.size()));
    vertices.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
    parents.push_back({a, b});
  }

  std::vector<Triangle> elements;
  std::vector<int> generation;
  std::vector<int> refinement_edge;
  elements.reserve(mesh.num_elements() + 2 * midpoint.size());

  // Children's refinement edges are edges of the parent, so the recursion
  // depth within one call is at most two.
  auto split = [&](auto&& self, const Triangle& tri, int ref, int gen) -> void {
    const int a = tri[ref];
    const int b = tri[(ref + 1) % 3];
    const int c = tri[(ref + 2) % 3];
    const auto it = midpoint.find(edge_key(b, c));
    if (it == midpoint.end()) {
      elements.push_back(tri);
      generation.push_back(gen);
      refinement_edge.push_back(ref);
      return;
    }
    const int m = it->second;
    self(self, Triangle{a, b, m}, 2, gen + 1);
    self(self, Triangle{a, m, c}, 1, gen + 1);
  };
  for (int t = 0; t < ne; ++t)
    split(split, mesh.element(t), mesh.refinement_edge(t), mesh.generation(t));

  return {Mesh(std::move(vertices), std::move(elements), std::move(generation), std::move(refinement_edge)),
          std::move(parents)};
}

std::vector<double> interpolate(const Mesh& coarse, const Mesh& fine, const Parentage& parents,
                                std::span<const double> values) {
  if (values.size() != coarse.num_vertices())
    throw DimensionError("field has " + std::to_string(values.size()) + " values but the source mesh has " +
                         std::to_string(coarse.num_vertices()) + " vertices");
  if (parents.size() != fine.num_vertices() || fine.num_vertices() < coarse.num_vertices())
    throw DimensionError("parentage map does not belong to the target mesh");
  std::vector<double> out(fine.num_vertices());
  std::copy(values.begin(), values.end(), out.begin());
  for (std::size_t v = coarse.num_vertices(); v < out.size(); ++v)
    out[v] = 0.5 * (out[parents[v][0]] + out[parents[v][1]]);
  for (std::size_t v = 0; v < out.size(); ++v)
    if (fine.is_boundary(static_cast<int>(v)))
      out[v] = 0.0;
  return out;
}

double element_diameter(const Mesh& mesh, int t) {
  if (t < 0 || static_cast<std::size_t>(t) >= mesh.num_elements())
    throw std::out_of_range("element index " + std::to_string(t) + " out of range");
  return mesh.diameter(t);
}

double max_shape_ratio(const Mesh& mesh) {
  double ratio = 0.0;
  for (std::size_t t = 0; t < mesh.num_elements(); ++t)
    ratio = std::max(ratio, mesh.diameter(static_cast<int>(t)) / mesh.inradius(static_cast<int>(t)));
  return ratio;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  const auto old_precision = os.precision(17);
  os << "vertices " << mesh.num_vertices() << '\n' << "elements " << mesh.num_elements() << '\n';
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const Point& p = mesh.vertex(static_cast<int>(v));
    os << p.x << ' ' << p.y << ' ' << (mesh.is_boundary(static_cast<int>(v)) ? 1 : 0) << '\n';
  }
  for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
    const auto& e = mesh.element(static_cast<int>(t));
    os << e[0] << ' ' << e[1] << ' ' << e[2] << ' ' << mesh.generation(static_cast<int>(t)) << '\n';
  }
  os.precision(old_precision);
}

void write_field(std::ostream& os, std::span<const double> values) {
  const auto old_precision = os.precision(17);
  for (double v : values)
    os << v << '\n';
  os.precision(old_precision);
}

} // namespace ptcfem
