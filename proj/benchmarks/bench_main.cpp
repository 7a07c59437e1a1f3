#include "ptcfem/assembly.hpp"
#include "ptcfem/mesh.hpp"
#include "ptcfem/problem.hpp"
#include "ptcfem/sparse.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace ptcfem;

namespace {

DiscreteField smooth_field(const Mesh& m) {
  DiscreteField u(m.num_vertices());
  for (std::size_t v = 0; v < u.size(); ++v) {
    const Point p = m.vertex(static_cast<int>(v));
    u[v] = std::sin(M_PI * p.x) * std::sin(M_PI * p.y);
  }
  return u;
}

void BM_Residual(benchmark::State& state) {
  const Mesh m = unit_square_mesh(static_cast<int>(state.range(0)), SquareSplit::crisscross);
  const Assembler A(m);
  const auto p = example_1(6e-4);
  const auto u = smooth_field(m);
  for (auto _ : state)
    benchmark::DoNotOptimize(A.residual(u, p));
  state.counters["elements"] = static_cast<double>(m.num_elements());
}
BENCHMARK(BM_Residual)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Jacobian(benchmark::State& state) {
  const Mesh m = unit_square_mesh(static_cast<int>(state.range(0)), SquareSplit::crisscross);
  const Assembler A(m);
  const auto p = example_1(6e-4);
  const auto u = smooth_field(m);
  for (auto _ : state)
    benchmark::DoNotOptimize(A.jacobian(u, p));
  state.counters["elements"] = static_cast<double>(m.num_elements());
}
BENCHMARK(BM_Jacobian)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_LuSolve(benchmark::State& state) {
  const Mesh m = unit_square_mesh(static_cast<int>(state.range(0)), SquareSplit::crisscross);
  const Assembler A(m);
  const auto p = example_1(6e-4);
  const auto J = A.jacobian(smooth_field(m), p);
  const std::vector<double> b(J.rows(), 1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(direct_solve(J, b));
  state.counters["dofs"] = J.rows();
}
BENCHMARK(BM_LuSolve)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_RefineQuarter(benchmark::State& state) {
  const Mesh m = unit_square_mesh(static_cast<int>(state.range(0)), SquareSplit::crisscross);
  std::vector<int> marked;
  for (int t = 0; t < static_cast<int>(m.num_elements()); t += 4)
    marked.push_back(t);
  for (auto _ : state)
    benchmark::DoNotOptimize(refine(m, marked));
  state.counters["elements"] = static_cast<double>(m.num_elements());
}
BENCHMARK(BM_RefineQuarter)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
