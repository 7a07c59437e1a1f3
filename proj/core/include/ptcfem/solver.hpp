#ifndef PTCFEM_SOLVER_HPP
#define PTCFEM_SOLVER_HPP

#include "ptcfem/assembly.hpp"
#include "ptcfem/mesh.hpp"
#include "ptcfem/problem.hpp"
#include "ptcfem/sparse.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ptcfem {

/// Linear system solved on each pseudo-time step. J is the Jacobian at the
/// current iterate, Jbar the Jacobian frozen at a reference state.
enum class Variant {
  backward_euler,           ///< (alpha R + J) w = -g
  newmark,                  ///< (alpha R + gamma J) w = -g
  sigma_split_newmark,      ///< (alpha R + gamma((1-sigma) Jbar + sigma J)) w = -g
  normal_equations_be,      ///< (alpha R^T R + J^T J) w = -J^T g
  normal_equations_newmark, ///< (alpha R^T R + gamma J^T J) w = -J^T g
};

enum class XbarChoice {
  zero,              ///< Jbar = g'(0)
  previous_solution, ///< Jbar = g'(x0), the interpolated previous solution
};

enum class ExitCode {
  converged,      ///< residual at or below tol
  stalled_accept, ///< residual decreasing, slowing, at an acceptable rate
  failed,         ///< iteration limit exceeded or the linear solve broke down
};

enum class FailureReason { none, max_iterations, singular_system, invalid_state };

std::string_view to_string(Variant v);
std::string_view to_string(XbarChoice x);
std::string_view to_string(ExitCode e);
/// Throw ConfigError on unknown names.
Variant parse_variant(std::string_view name);
XbarChoice parse_xbar(std::string_view name);
ExitCode parse_exit_code(std::string_view name);

struct SolverConfig {
  Variant variant = Variant::sigma_split_newmark;
  double gamma = 10.0;
  double sigma0 = 0.9;
  double K0 = 2000.0;
  double tol = 1e-7;
  /// M in the accepted rate q_acc = 1 - 1/(M gamma).
  double rate_slack = 2.0;
  int max_iterations = 50;
  XbarChoice xbar = XbarChoice::zero;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  double accepted_rate() const { return 1.0 - 1.0 / (rate_slack * gamma); }
  double predicted_rate() const { return 1.0 - 1.0 / gamma; }
};

/// Per-iteration parameters. residuals holds r_0 .. r_n for the current
/// partition.
struct SolverState {
  int n = 0;
  double alpha = 0.0;
  double beta = 1.0;
  double sigma = 1.0;
  std::vector<double> residuals;
  std::optional<double> previous_partition_residual;
};

/// One row of the iteration log. Row n describes iterate x^n: its residual,
/// the ratio r_n / r_{n-1}, the alpha and beta that go with it, and the sigma
/// of the step that produced it (row 0: the sigma of the first step).
struct IterationRecord {
  int partition = 0;
  int n = 0;
  double residual = 0.0;
  std::optional<double> ratio;
  double alpha = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;
  std::optional<ExitCode> exit;
};

struct SolveOutcome {
  ExitCode exit_code = ExitCode::failed;
  FailureReason failure = FailureReason::none;
  /// Final iterate; the zero field when the solve failed.
  DiscreteField solution;
  std::vector<double> residuals;
  /// r_{n+1} / r_n at exit; unset when no step was taken.
  std::optional<double> final_ratio;
  double sigma_final = 1.0;
  double gamma_used = 1.0;
  std::vector<IterationRecord> log;

  int iterations() const { return residuals.empty() ? 0 : static_cast<int>(residuals.size()) - 1; }
};

/// sigma = max(sigma0, 1 - r / K0).
double update_sigma(double residual_norm, const SolverConfig& config);

struct AlphaUpdate {
  double alpha;
  double beta;
};

/// beta_n = r_n / r_{n-1}, kept in [beta_{n-1}/2, 1] when the residual drops
/// and at most 2 beta_{n-1} when it grows; alpha_n = beta_n r_n. Uses the last
/// entry of state.residuals as r_{n-1} and state.beta as beta_{n-1}.
AlphaUpdate update_alpha(const SolverState& state, double new_residual);

/// Evaluates the exit criteria after x^{n+1}; state.residuals must end with
/// r_{n+1}. Returns nothing when the iteration should continue.
std::optional<ExitCode> check_exit(const SolverState& state, const SolverConfig& config, double initial_residual);

/// Update vector w of one pseudo-time step; `residual` is g(x^n). Jbar is
/// only read by sigma_split_newmark. Throws SingularMatrixError.
Vector step_system(Variant variant, double alpha, const SparseMatrix& R, const SparseMatrix& J,
                   const SparseMatrix* Jbar, double gamma, double sigma, std::span<const double> residual);

/// Selection threshold psi from jump indicators: psi~ = sqrt(median zeta),
/// psi = sqrt(psi~) if psi~ > 1, else psi~.
double selection_threshold(std::span<const double> zeta);

/// Per free vertex, 1 if some element containing it has zeta_T > psi.
std::vector<char> regularizer_activation(const Mesh& mesh, const DofMap& dofs, std::span<const double> zeta);

/// D R_global D with D the activation pattern.
SparseMatrix masked_laplacian(const SparseMatrix& laplacian, std::span<const char> active);

/// Targeted regularizer from the jump indicators of the initial iterate u0.
SparseMatrix regularizer(const Assembler& assembler, std::span<const double> u0, const ProblemSpec& problem,
                         const SparseMatrix& laplacian);

/// Pseudo-transient continuation on one mesh, starting from x0. Step
/// failures end the solve with ExitCode::failed rather than throwing.
SolveOutcome solve_on_partition(const Assembler& assembler, const ProblemSpec& problem, const DiscreteField& x0,
                                const SolverConfig& config, const SparseMatrix& R,
                                std::optional<double> previous_final_residual, int partition = 0);

/// CSV header and rows: partition,n,residual,ratio,alpha,beta,sigma,gamma,exit.
void write_iteration_header(std::ostream& os);
void write_iteration_rows(std::ostream& os, std::span<const IterationRecord> rows);

} // namespace ptcfem

#endif // PTCFEM_SOLVER_HPP
