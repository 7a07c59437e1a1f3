#ifndef PTCFEM_INDICATORS_HPP
#define PTCFEM_INDICATORS_HPP

#include "ptcfem/assembly.hpp"

#include <span>
#include <vector>

namespace ptcfem {

/// Residual indicators eta_T and their flux-jump part zeta_T, where
///   zeta_T^2 = h_T |[kappa(u) grad u . n]|^2_{L2(dT)},
///   eta_T^2  = h_T^2 |g(u)|^2_{L2(T)} + zeta_T^2,
/// with the strong residual on each element reduced, for piecewise-linear u, to
/// -kappa'(u)|grad u|^2 + b(u) . grad u - f.
struct IndicatorField {
  std::vector<double> eta;
  std::vector<double> zeta;
  double eta_total = 0.0;
  double zeta_total = 0.0;
};

IndicatorField compute_indicators(const Assembler& assembler, std::span<const double> u, const ProblemSpec& problem);
IndicatorField compute_indicators(const Mesh& mesh, std::span<const double> u, const ProblemSpec& problem);

/// zeta_T only.
std::vector<double> jump_indicators(const Assembler& assembler, std::span<const double> u,
                                    const ProblemSpec& problem);

} // namespace ptcfem

#endif // PTCFEM_INDICATORS_HPP
