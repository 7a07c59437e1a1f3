#include "ptcfem/solver.hpp"

#include "ptcfem/error.hpp"
#include "ptcfem/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace ptcfem {

std::string_view to_string(Variant v) {
  switch (v) {
  case Variant::backward_euler:
    return "backward_euler";
  case Variant::newmark:
    return "newmark";
  case Variant::sigma_split_newmark:
    return "sigma_split_newmark";
  case Variant::normal_equations_be:
    return "normal_equations_be";
  case Variant::normal_equations_newmark:
    return "normal_equations_newmark";
  }
  return "unknown";
}

std::string_view to_string(XbarChoice x) { return x == XbarChoice::zero ? "zero" : "previous_solution"; }

std::string_view to_string(ExitCode e) {
  switch (e) {
  case ExitCode::converged:
    return "converged";
  case ExitCode::stalled_accept:
    return "stalled_accept";
  case ExitCode::failed:
    return "failed";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (auto v : {Variant::backward_euler, Variant::newmark, Variant::sigma_split_newmark,
                 Variant::normal_equations_be, Variant::normal_equations_newmark})
    if (to_string(v) == name)
      return v;
  throw ConfigError("variant", "unknown solver variant '" + std::string(name) + "'");
}

XbarChoice parse_xbar(std::string_view name) {
  if (name == "zero")
    return XbarChoice::zero;
  if (name == "previous_solution")
    return XbarChoice::previous_solution;
  throw ConfigError("xbar", "expected 'zero' or 'previous_solution', got '" + std::string(name) + "'");
}

ExitCode parse_exit_code(std::string_view name) {
  for (auto e : {ExitCode::converged, ExitCode::stalled_accept, ExitCode::failed})
    if (to_string(e) == name)
      return e;
  throw ConfigError("exit_code", "unknown exit code '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
  if (!(gamma >= 1.0) || !std::isfinite(gamma))
    throw ConfigError("gamma", "must be >= 1");
  if (!(sigma0 > 0.0 && sigma0 < 1.0))
    throw ConfigError("sigma0", "must lie in (0, 1)");
  if (!(K0 > 0.0) || !std::isfinite(K0))
    throw ConfigError("K0", "must be positive");
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw ConfigError("tol", "must be positive");
  if (!(rate_slack > 1.0) || !std::isfinite(rate_slack))
    throw ConfigError("M", "must be > 1");
  if (max_iterations < 1)
    throw ConfigError("max_iterations", "must be a positive integer");
}

double update_sigma(double residual_norm, const SolverConfig& config) {
  return std::clamp(1.0 - residual_norm / config.K0, config.sigma0, 1.0);
}

AlphaUpdate update_alpha(const SolverState& state, double new_residual) {
  const double previous = state.residuals.back();
  double beta = previous > 0.0 ? new_residual / previous : 1.0;
  if (new_residual < previous)
    beta = std::clamp(beta, 0.5 * state.beta, 1.0);
  else if (new_residual > previous)
    beta = std::min(beta, 2.0 * state.beta);
  return {beta * new_residual, beta};
}

std::optional<ExitCode> check_exit(const SolverState& state, const SolverConfig& config, double initial_residual) {
  const auto& r = state.residuals;
  if (r.empty())
    return std::nullopt;
  const double next = r.back();
  if (next <= config.tol)
    return ExitCode::converged;
  if (r.size() >= 3) {
    const double current = r[r.size() - 2];
    const double before = r[r.size() - 3];
    double floor = initial_residual;
    if (state.previous_partition_residual)
      floor = std::min(floor, *state.previous_partition_residual);
    const double ratio = next / current;
    const bool decreasing = next < current;
    const bool below_start = current < floor;
    const bool acceptable_rate = ratio < config.accepted_rate();
    const bool slowing = ratio > current / before;
    if (decreasing && below_start && acceptable_rate && slowing)
      return ExitCode::stalled_accept;
  }
  if (static_cast<int>(r.size()) - 1 > config.max_iterations)
    return ExitCode::failed;
  return std::nullopt;
}

Vector step_system(Variant variant, double alpha, const SparseMatrix& R, const SparseMatrix& J,
                   const SparseMatrix* Jbar, double gamma, double sigma, std::span<const double> residual) {
  Vector rhs(residual.begin(), residual.end());
  for (double& v : rhs)
    v = -v;
  switch (variant) {
  case Variant::backward_euler:
    return direct_solve(add_scaled(R, J, alpha, 1.0), rhs);
  case Variant::newmark:
    return direct_solve(add_scaled(R, J, alpha, gamma), rhs);
  case Variant::sigma_split_newmark: {
    if (Jbar == nullptr)
      throw DimensionError("sigma-split step needs the frozen Jacobian");
    const SparseMatrix blend = add_scaled(*Jbar, J, gamma * (1.0 - sigma), gamma * sigma);
    return direct_solve(add_scaled(R, blend, alpha, 1.0), rhs);
  }
  case Variant::normal_equations_be:
  case Variant::normal_equations_newmark: {
    const double g = variant == Variant::normal_equations_be ? 1.0 : gamma;
    const SparseMatrix lhs = add_scaled(transpose_product(R), transpose_product(J), alpha, g);
    return direct_solve(lhs, transpose_apply(J, rhs));
  }
  }
  throw Error("unknown solver variant");
}

double selection_threshold(std::span<const double> zeta) {
  if (zeta.empty())
    return 0.0;
  std::vector<double> sorted(zeta.begin(), zeta.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const double psi_tilde = std::sqrt(median);
  return psi_tilde > 1.0 ? std::sqrt(psi_tilde) : psi_tilde;
}

std::vector<char> regularizer_activation(const Mesh& mesh, const DofMap& dofs, std::span<const double> zeta) {
  if (zeta.size() != mesh.num_elements())
    throw DimensionError("one jump indicator per element expected");
  const double psi = selection_threshold(zeta);
  std::vector<char> active(static_cast<std::size_t>(dofs.size()), 0);
  for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
    if (!(zeta[t] > psi))
      continue;
    for (int v : mesh.element(static_cast<int>(t)))
      if (const int d = dofs.vertex_to_dof[v]; d >= 0)
        active[d] = 1;
  }
  return active;
}

SparseMatrix masked_laplacian(const SparseMatrix& laplacian, std::span<const char> active) {
  if (active.size() != static_cast<std::size_t>(laplacian.rows()))
    throw DimensionError("activation pattern does not match the matrix");
  std::vector<int> row_ptr(static_cast<std::size_t>(laplacian.rows()) + 1, 0);
  std::vector<int> col_idx;
  std::vector<double> values;
  const auto rp = laplacian.row_ptr();
  const auto ci = laplacian.col_idx();
  const auto va = laplacian.values();
  for (int i = 0; i < laplacian.rows(); ++i) {
    if (active[i])
      for (int k = rp[i]; k < rp[i + 1]; ++k)
        if (active[ci[k]]) {
          col_idx.push_back(ci[k]);
          values.push_back(va[k]);
        }
    row_ptr[i + 1] = static_cast<int>(col_idx.size());
  }
  return SparseMatrix(laplacian.rows(), laplacian.cols(), std::move(row_ptr), std::move(col_idx),
                      std::move(values));
}

SparseMatrix regularizer(const Assembler& assembler, std::span<const double> u0, const ProblemSpec& problem,
                         const SparseMatrix& laplacian) {
  const auto zeta = jump_indicators(assembler, u0, problem);
  return masked_laplacian(laplacian, regularizer_activation(assembler.mesh(), assembler.dofs(), zeta));
}

namespace {

// Residual norm of a nodal iterate; nullopt when assembly hits a non-finite value.
std::optional<double> residual_norm(const Assembler& assembler, const DiscreteField& x, const ProblemSpec& problem,
                                    Vector* residual) {
  try {
    Vector r = assembler.residual(x, problem);
    const double norm = norm2(r);
    if (!std::isfinite(norm))
      return std::nullopt;
    if (residual)
      *residual = std::move(r);
    return norm;
  } catch (const InvalidStateError&) {
    return std::nullopt;
  }
}

} // namespace

SolveOutcome solve_on_partition(const Assembler& assembler, const ProblemSpec& problem, const DiscreteField& x0,
                                const SolverConfig& config, const SparseMatrix& R,
                                std::optional<double> previous_final_residual, int partition) {
  config.validate();
  const Mesh& mesh = assembler.mesh();
  if (x0.size() != mesh.num_vertices())
    throw DimensionError("initial iterate does not match the mesh");
  if (R.rows() != assembler.num_dofs() || R.cols() != assembler.num_dofs())
    throw DimensionError("regularizer does not match the dof count");

  SolveOutcome out;
  out.gamma_used = config.gamma;
  const bool split = config.variant == Variant::sigma_split_newmark;

  auto fail = [&](FailureReason reason) {
    out.exit_code = ExitCode::failed;
    out.failure = reason;
    out.solution.assign(mesh.num_vertices(), 0.0);
    if (!out.log.empty())
      out.log.back().exit = ExitCode::failed;
    return out;
  };

  DiscreteField x = x0;
  for (std::size_t v = 0; v < x.size(); ++v)
    if (mesh.is_boundary(static_cast<int>(v)))
      x[v] = 0.0;

  Vector g;
  const auto r0 = residual_norm(assembler, x, problem, &g);
  if (!r0)
    return fail(FailureReason::invalid_state);

  SolverState state;
  state.residuals.push_back(*r0);
  state.alpha = *r0;
  state.beta = 1.0;
  state.previous_partition_residual = previous_final_residual;
  state.sigma = split ? update_sigma(*r0, config) : 1.0;
  out.residuals = state.residuals;
  out.sigma_final = state.sigma;
  out.log.push_back({partition, 0, *r0, std::nullopt, state.alpha, state.beta, state.sigma, config.gamma, {}});

  if (*r0 <= config.tol) {
    out.exit_code = ExitCode::converged;
    out.solution = std::move(x);
    out.log.back().exit = ExitCode::converged;
    return out;
  }

  std::optional<SparseMatrix> Jbar;
  if (split) {
    try {
      if (config.xbar == XbarChoice::zero)
        Jbar = assembler.jacobian(DiscreteField(mesh.num_vertices(), 0.0), problem);
      else
        Jbar = assembler.jacobian(x, problem);
    } catch (const InvalidStateError&) {
      return fail(FailureReason::invalid_state);
    }
  }

  while (true) {
    const double sigma = split ? update_sigma(state.residuals.back(), config) : 1.0;
    Vector w;
    try {
      const SparseMatrix J = assembler.jacobian(x, problem);
      w = step_system(config.variant, state.alpha, R, J, Jbar ? &*Jbar : nullptr, config.gamma, sigma, g);
    } catch (const SingularMatrixError&) {
      return fail(FailureReason::singular_system);
    } catch (const InvalidStateError&) {
      return fail(FailureReason::invalid_state);
    }
    for (int d = 0; d < assembler.num_dofs(); ++d)
      x[assembler.dofs().dof_to_vertex[d]] += w[d];

    Vector g_next;
    const auto r_next = residual_norm(assembler, x, problem, &g_next);
    if (!r_next)
      return fail(FailureReason::invalid_state);

    const double r_prev = state.residuals.back();
    const AlphaUpdate update = update_alpha(state, *r_next);
    state.residuals.push_back(*r_next);
    state.n += 1;
    state.sigma = sigma;
    out.residuals = state.residuals;
    out.sigma_final = sigma;
    out.final_ratio = r_prev > 0.0 ? *r_next / r_prev : 0.0;

    const auto decision = check_exit(state, config, *r0);
    out.log.push_back(
        {partition, state.n, *r_next, out.final_ratio, update.alpha, update.beta, sigma, config.gamma, decision});
    if (decision) {
      if (*decision == ExitCode::failed)
        return fail(FailureReason::max_iterations);
      out.exit_code = *decision;
      out.solution = std::move(x);
      return out;
    }
    state.alpha = update.alpha;
    state.beta = update.beta;
    g = std::move(g_next);
  }
}

void write_iteration_header(std::ostream& os) {
  os << "partition,n,residual,ratio,alpha,beta,sigma,gamma,exit\n";
}

void write_iteration_rows(std::ostream& os, std::span<const IterationRecord> rows) {
  const auto old_precision = os.precision(17);
  for (const auto& row : rows) {
    os << row.partition << ',' << row.n << ',' << row.residual << ',';
    if (row.ratio)
      os << *row.ratio;
    os << ',' << row.alpha << ',' << row.beta << ',' << row.sigma << ',' << row.gamma << ',';
    if (row.exit)
      os << to_string(*row.exit);
    os << '\n';
  }
  os.precision(old_precision);
}

} // namespace ptcfem
