#include "ptcfem/assembly.hpp"

#include "ptcfem/error.hpp"
#include "ptcfem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ptcfem {

namespace {

double finite_or_throw(double value, const char* what, int t) {
  if (!std::isfinite(value))
    throw InvalidStateError(std::string("non-finite ") + what + " on element " + std::to_string(t), t);
  return value;
}

Point map_point(const Mesh& mesh, const Triangle& tri, const std::array<double, 3>& lambda) {
  Point p;
  for (int i = 0; i < 3; ++i) {
    p.x += lambda[i] * mesh.vertex(tri[i]).x;
    p.y += lambda[i] * mesh.vertex(tri[i]).y;
  }
  return p;
}

} // namespace

DofMap make_dof_map(const Mesh& mesh) {
  DofMap map;
  map.vertex_to_dof.assign(mesh.num_vertices(), -1);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (!mesh.is_boundary(static_cast<int>(v))) {
      map.vertex_to_dof[v] = static_cast<int>(map.dof_to_vertex.size());
      map.dof_to_vertex.push_back(static_cast<int>(v));
    }
  return map;
}

Assembler::Assembler(const Mesh& mesh) : mesh_(&mesh), dofs_(make_dof_map(mesh)) {
  const std::size_t ne = mesh.num_elements();
  grads_.resize(ne);
  std::vector<Triplet> skeleton;
  skeleton.reserve(9 * ne);
  for (std::size_t t = 0; t < ne; ++t) {
    const auto& tri = mesh.element(static_cast<int>(t));
    const double twice_area = 2.0 * mesh.area(static_cast<int>(t));
    for (int i = 0; i < 3; ++i) {
      const Point& b = mesh.vertex(tri[(i + 1) % 3]);
      const Point& c = mesh.vertex(tri[(i + 2) % 3]);
      // grad lambda_i is the inward normal of the opposite edge over the height.
      grads_[t][i] = {(b.y - c.y) / twice_area, (c.x - b.x) / twice_area};
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int di = dofs_.vertex_to_dof[tri[i]];
        const int dj = dofs_.vertex_to_dof[tri[j]];
        if (di >= 0 && dj >= 0)
          skeleton.push_back({di, dj, 0.0});
      }
  }
  pattern_ = SparseMatrix::from_triplets(num_dofs(), num_dofs(), std::move(skeleton));
  slots_.resize(ne);
  for (std::size_t t = 0; t < ne; ++t) {
    const auto& tri = mesh.element(static_cast<int>(t));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int di = dofs_.vertex_to_dof[tri[i]];
        const int dj = dofs_.vertex_to_dof[tri[j]];
        slots_[t][3 * i + j] = (di >= 0 && dj >= 0) ? static_cast<int>(pattern_.find(di, dj)) : -1;
      }
  }
}

void Assembler::check_field(std::span<const double> u) const {
  if (u.size() != mesh_->num_vertices())
    throw DimensionError("field has " + std::to_string(u.size()) + " values, mesh has " +
                         std::to_string(mesh_->num_vertices()) + " vertices");
}

Vec2 Assembler::gradient(int t, std::span<const double> u) const {
  const auto& tri = mesh_->element(t);
  Vec2 g{0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    g[0] += u[tri[i]] * grads_[t][i][0];
    g[1] += u[tri[i]] * grads_[t][i][1];
  }
  return g;
}

Vector Assembler::residual(std::span<const double> u, const ProblemSpec& problem) const {
  check_field(u);
  Vector r(static_cast<std::size_t>(num_dofs()), 0.0);
  const auto rule = triangle_rule_order4();
  for (std::size_t tt = 0; tt < mesh_->num_elements(); ++tt) {
    const int t = static_cast<int>(tt);
    const auto& tri = mesh_->element(t);
    const auto& G = grads_[t];
    const double area = mesh_->area(t);
    const Vec2 du = gradient(t, u);
    std::array<double, 3> local{0.0, 0.0, 0.0};
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& lambda = rule.points[q];
      const double wa = rule.weights[q] * area;
      const double uq = lambda[0] * u[tri[0]] + lambda[1] * u[tri[1]] + lambda[2] * u[tri[2]];
      const Point xq = map_point(*mesh_, tri, lambda);
      const double k = finite_or_throw(problem.kappa(uq), "kappa", t);
      double source = -finite_or_throw(problem.f(xq.x, xq.y), "load", t);
      if (!problem.convection_free) {
        const Vec2 bq = problem.b(uq);
        source += finite_or_throw(bq[0] * du[0] + bq[1] * du[1], "convection", t);
      }
      for (int i = 0; i < 3; ++i)
        local[i] += wa * (k * (du[0] * G[i][0] + du[1] * G[i][1]) + source * lambda[i]);
    }
    for (int i = 0; i < 3; ++i)
      if (const int d = dofs_.vertex_to_dof[tri[i]]; d >= 0)
        r[d] += local[i];
  }
  return r;
}

SparseMatrix Assembler::jacobian(std::span<const double> u, const ProblemSpec& problem) const {
  check_field(u);
  SparseMatrix J = pattern_;
  auto values = J.values();
  std::fill(values.begin(), values.end(), 0.0);
  const auto rule = triangle_rule_order4();
  for (std::size_t tt = 0; tt < mesh_->num_elements(); ++tt) {
    const int t = static_cast<int>(tt);
    const auto& tri = mesh_->element(t);
    const auto& G = grads_[t];
    const double area = mesh_->area(t);
    const Vec2 du = gradient(t, u);
    std::array<double, 9> local{};
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& lambda = rule.points[q];
      const double wa = rule.weights[q] * area;
      const double uq = lambda[0] * u[tri[0]] + lambda[1] * u[tri[1]] + lambda[2] * u[tri[2]];
      const double k = finite_or_throw(problem.kappa(uq), "kappa", t);
      const double kp = finite_or_throw(problem.kappa_prime(uq), "kappa'", t);
      Vec2 bq{0.0, 0.0};
      double react = 0.0;
      if (!problem.convection_free) {
        bq = problem.b(uq);
        const Vec2 bp = problem.b_prime(uq);
        react = finite_or_throw(bp[0] * du[0] + bp[1] * du[1], "convection derivative", t);
      }
      for (int i = 0; i < 3; ++i) {
        const double du_gi = du[0] * G[i][0] + du[1] * G[i][1];
        for (int j = 0; j < 3; ++j) {
          const double gj_gi = G[j][0] * G[i][0] + G[j][1] * G[i][1];
          const double b_gj = bq[0] * G[j][0] + bq[1] * G[j][1];
          local[3 * i + j] += wa * (k * gj_gi + kp * lambda[j] * du_gi + b_gj * lambda[i] +
                                    react * lambda[j] * lambda[i]);
        }
      }
    }
    for (int k = 0; k < 9; ++k)
      if (slots_[t][k] >= 0)
        values[slots_[t][k]] += local[k];
  }
  return J;
}

SparseMatrix Assembler::laplacian() const {
  SparseMatrix A = pattern_;
  auto values = A.values();
  std::fill(values.begin(), values.end(), 0.0);
  for (std::size_t tt = 0; tt < mesh_->num_elements(); ++tt) {
    const int t = static_cast<int>(tt);
    const auto& G = grads_[t];
    const double area = mesh_->area(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (slots_[t][3 * i + j] >= 0)
          values[slots_[t][3 * i + j]] += area * (G[i][0] * G[j][0] + G[i][1] * G[j][1]);
  }
  return A;
}

std::vector<double> Assembler::edge_jumps(std::span<const double> u, const ProblemSpec& problem) const {
  check_field(u);
  std::vector<double> jumps(mesh_->num_edges(), 0.0);
  const auto rule = gauss3();
  for (std::size_t e = 0; e < mesh_->num_edges(); ++e) {
    const auto& adj = mesh_->edge_elements(static_cast<int>(e));
    if (adj[1] < 0)
      continue;
    const auto [a, b] = mesh_->edge(static_cast<int>(e));
    const Point& pa = mesh_->vertex(a);
    const Point& pb = mesh_->vertex(b);
    const double length = std::hypot(pb.x - pa.x, pb.y - pa.y);
    const Vec2 n{(pb.y - pa.y) / length, (pa.x - pb.x) / length};
    const Vec2 g0 = gradient(adj[0], u);
    const Vec2 g1 = gradient(adj[1], u);
    const double d = (g0[0] - g1[0]) * n[0] + (g0[1] - g1[1]) * n[1];
    double integral = 0.0;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const double s = rule.points[q];
      const double k = finite_or_throw(problem.kappa((1.0 - s) * u[a] + s * u[b]), "kappa", adj[0]);
      integral += rule.weights[q] * k * k;
    }
    jumps[e] = length * integral * d * d;
  }
  return jumps;
}

DiscreteField Assembler::to_nodal(std::span<const double> free_values) const {
  if (free_values.size() != static_cast<std::size_t>(num_dofs()))
    throw DimensionError("free vector length does not match the dof count");
  DiscreteField u(mesh_->num_vertices(), 0.0);
  for (int d = 0; d < num_dofs(); ++d)
    u[dofs_.dof_to_vertex[d]] = free_values[d];
  return u;
}

Vector Assembler::to_free(std::span<const double> nodal) const {
  check_field(nodal);
  Vector v(static_cast<std::size_t>(num_dofs()));
  for (int d = 0; d < num_dofs(); ++d)
    v[d] = nodal[dofs_.dof_to_vertex[d]];
  return v;
}

Vector assemble_residual(const Mesh& mesh, std::span<const double> u, const ProblemSpec& problem) {
  return Assembler(mesh).residual(u, problem);
}

SparseMatrix assemble_jacobian(const Mesh& mesh, std::span<const double> u, const ProblemSpec& problem) {
  return Assembler(mesh).jacobian(u, problem);
}

SparseMatrix assemble_laplacian(const Mesh& mesh) { return Assembler(mesh).laplacian(); }

double h1_error(const Mesh& mesh, std::span<const double> u, const ProblemSpec& problem) {
  if (!problem.exact)
    throw UnsupportedOperationError("problem '" + problem.name + "' has no exact solution");
  if (u.size() != mesh.num_vertices())
    throw DimensionError("field does not match the mesh");
  const auto& exact = *problem.exact;
  const auto rule = triangle_rule_order4();
  double sum = 0.0;
  for (std::size_t tt = 0; tt < mesh.num_elements(); ++tt) {
    const int t = static_cast<int>(tt);
    const auto& tri = mesh.element(t);
    const double area = mesh.area(t);
    const double twice_area = 2.0 * area;
    Vec2 du{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
      const Point& b = mesh.vertex(tri[(i + 1) % 3]);
      const Point& c = mesh.vertex(tri[(i + 2) % 3]);
      du[0] += u[tri[i]] * (b.y - c.y) / twice_area;
      du[1] += u[tri[i]] * (c.x - b.x) / twice_area;
    }
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& lambda = rule.points[q];
      const Point xq = map_point(mesh, tri, lambda);
      const double uq = lambda[0] * u[tri[0]] + lambda[1] * u[tri[1]] + lambda[2] * u[tri[2]];
      const double ev = uq - exact.value(xq.x, xq.y);
      const Vec2 g = exact.gradient(xq.x, xq.y);
      const double ex = du[0] - g[0];
      const double ey = du[1] - g[1];
      sum += rule.weights[q] * area * (ev * ev + ex * ex + ey * ey);
    }
  }
  return std::sqrt(sum);
}

std::array<double, 3> edge_jump(const Mesh& mesh, std::span<const double> u, const ProblemSpec& problem, int t) {
  if (t < 0 || static_cast<std::size_t>(t) >= mesh.num_elements())
    throw std::out_of_range("element index " + std::to_string(t) + " out of range");
  const auto jumps = Assembler(mesh).edge_jumps(u, problem);
  const auto& edges = mesh.element_edges(t);
  return {jumps[edges[0]], jumps[edges[1]], jumps[edges[2]]};
}

} // namespace ptcfem
