#include "ptcfem/indicators.hpp"

#include "ptcfem/error.hpp"
#include "ptcfem/quadrature.hpp"

#include <cmath>
#include <string>

namespace ptcfem {

namespace {

std::vector<double> jump_squares(const Assembler& assembler, std::span<const double> u, const ProblemSpec& problem) {
  const Mesh& mesh = assembler.mesh();
  const auto edge_values = assembler.edge_jumps(u, problem);
  std::vector<double> zeta2(mesh.num_elements());
  for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
    const auto& edges = mesh.element_edges(static_cast<int>(t));
    zeta2[t] = mesh.diameter(static_cast<int>(t)) *
               (edge_values[edges[0]] + edge_values[edges[1]] + edge_values[edges[2]]);
  }
  return zeta2;
}

} // namespace

std::vector<double> jump_indicators(const Assembler& assembler, std::span<const double> u,
                                    const ProblemSpec& problem) {
  auto zeta = jump_squares(assembler, u, problem);
  for (double& z : zeta)
    z = std::sqrt(z);
  return zeta;
}

IndicatorField compute_indicators(const Assembler& assembler, std::span<const double> u,
                                  const ProblemSpec& problem) {
  const Mesh& mesh = assembler.mesh();
  const auto zeta2 = jump_squares(assembler, u, problem);
  const auto rule = triangle_rule_order4();
  IndicatorField out;
  out.eta.resize(mesh.num_elements());
  out.zeta.resize(mesh.num_elements());
  double eta_sum = 0.0;
  double zeta_sum = 0.0;
  for (std::size_t tt = 0; tt < mesh.num_elements(); ++tt) {
    const int t = static_cast<int>(tt);
    const auto& tri = mesh.element(t);
    const double area = mesh.area(t);
    const double h = mesh.diameter(t);
    const Vec2 du = assembler.gradient(t, u);
    const double du2 = du[0] * du[0] + du[1] * du[1];
    double volume = 0.0;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& lambda = rule.points[q];
      double x = 0.0, y = 0.0, uq = 0.0;
      for (int i = 0; i < 3; ++i) {
        x += lambda[i] * mesh.vertex(tri[i]).x;
        y += lambda[i] * mesh.vertex(tri[i]).y;
        uq += lambda[i] * u[tri[i]];
      }
      double strong = -problem.kappa_prime(uq) * du2 - problem.f(x, y);
      if (!problem.convection_free) {
        const Vec2 bq = problem.b(uq);
        strong += bq[0] * du[0] + bq[1] * du[1];
      }
      volume += rule.weights[q] * area * strong * strong;
    }
    if (!std::isfinite(volume))
      throw InvalidStateError("non-finite element residual on element " + std::to_string(t), t);
    const double eta2 = h * h * volume + zeta2[tt];
    out.eta[tt] = std::sqrt(eta2);
    out.zeta[tt] = std::sqrt(zeta2[tt]);
    eta_sum += eta2;
    zeta_sum += zeta2[tt];
  }
  out.eta_total = std::sqrt(eta_sum);
  out.zeta_total = std::sqrt(zeta_sum);
  return out;
}

IndicatorField compute_indicators(const Mesh& mesh, std::span<const double> u, const ProblemSpec& problem) {
  return compute_indicators(Assembler(mesh), u, problem);
}

} // namespace ptcfem
