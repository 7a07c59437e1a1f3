#ifndef PTCFEM_ADAPTIVE_HPP
#define PTCFEM_ADAPTIVE_HPP

#include "ptcfem/indicators.hpp"
#include "ptcfem/mesh.hpp"
#include "ptcfem/problem.hpp"
#include "ptcfem/solver.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace ptcfem {

struct MarkedSet {
  std::vector<int> elements; ///< sorted, unique
  /// Set when a positive fraction was requested but every indicator is zero.
  bool nothing_to_mark = false;
};

struct DorflerSplit {
  double theta_C;
  double theta_F;
};

/// theta_C = theta (1/2 + atan(r / scale - pi/2) / pi), clamped to [0, theta];
/// theta_F = theta - theta_C.
DorflerSplit phi_split(double theta, double final_residual, double coarse_split_scale = 100.0);

/// Union of two Dorfler sets over eta_T^2. The fine set is the shortest prefix
/// of elements sorted by decreasing eta reaching theta_F of the total; the
/// coarse set the shortest prefix sorted by increasing generation, then
/// decreasing eta, reaching theta_C. When theta_C > 0 the result always holds
/// the largest indicator overall and the largest among the coarsest elements.
MarkedSet mark(const Mesh& mesh, std::span<const double> eta, double theta_F, double theta_C);

/// All elements of minimum generation.
MarkedSet mark_coarsest(const Mesh& mesh);

/// |ratio - (1 - 1/gamma)| classification used by update_gamma: true when
/// 1 - 1/gamma <= ratio <= 1 - 1/gamma + rate_tolerance.
bool at_predicted_rate(double ratio, double gamma, double rate_tolerance);

/// Newmark parameter for the next partition:
///   converged:      gamma - 2 at the predicted rate, else gamma - 1 (only when gamma > 1);
///   stalled_accept: gamma - 2 at the predicted rate, gamma - 1 when faster, else unchanged;
///   failed:         gamma + 2 when the iteration limit was hit with ratios below q_acc,
///                   else gamma + 1.
/// Never returns less than 1.
double update_gamma(double gamma, const SolveOutcome& outcome, double rate_tolerance, double rate_slack = 2.0);

struct AdaptiveRunConfig {
  int initial_cells = 6;
  SquareSplit initial_split = SquareSplit::crisscross;
  double theta = 0.6;
  double coarse_split_scale = 100.0;
  double rate_tolerance = 0.05;
  /// solver.gamma is the initial gamma.
  SolverConfig solver;
  int max_levels = 40;
  /// Stop before solving on a mesh with more elements than this.
  std::size_t max_elements = 400000;
  /// Stop after this many levels have exited converged; 0 disables.
  int stop_after_converged = 0;
  /// On partitions that start from the zero field (level 0 and after a
  /// failure) the jump indicators vanish and the selection rule switches the
  /// regularizer off entirely. When set, the full Laplacian is used there.
  bool regularize_zero_start = true;

  void validate() const;
};

struct LevelReport {
  int level = 0;
  std::size_t elements = 0;
  std::size_t dofs = 0;
  double max_h = 0.0;
  ExitCode exit_code = ExitCode::failed;
  FailureReason failure = FailureReason::none;
  int iterations = 0;
  double first_residual = 0.0;
  double final_residual = 0.0;
  std::optional<double> final_ratio;
  double gamma = 0.0;
  double sigma_final = 0.0;
  double eta_total = 0.0;
  double zeta_total = 0.0;
  std::optional<double> h1_error;
  double theta_C = 0.0;
  double theta_F = 0.0;
  std::size_t marked = 0;
  bool at_predicted_rate = false;
};

/// Everything a caller may want to persist from one level.
struct LevelData {
  const LevelReport& report;
  const Mesh& mesh;
  const SolveOutcome& outcome;
  const IndicatorField& indicators;
};

using LevelCallback = std::function<void(const LevelData&)>;

/// Solve-estimate-mark-refine loop driven by the pseudo-transient solver.
std::vector<LevelReport> adaptive_solve(const AdaptiveRunConfig& config, const ProblemSpec& problem,
                                        const LevelCallback& on_level = {});

/// Same loop from a caller-supplied initial mesh.
std::vector<LevelReport> adaptive_solve(const AdaptiveRunConfig& config, const ProblemSpec& problem,
                                        Mesh initial_mesh, const LevelCallback& on_level = {});

/// levels.csv columns: level,elements,max_h,exit_code,iterations,first_residual,
/// final_residual,final_ratio,gamma,sigma_final,eta_total,zeta_total,h1_error.
void write_level_header(std::ostream& os);
void write_level_row(std::ostream& os, const LevelReport& report);

} // namespace ptcfem

#endif // PTCFEM_ADAPTIVE_HPP
