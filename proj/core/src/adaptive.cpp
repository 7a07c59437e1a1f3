#include "ptcfem/adaptive.hpp"

#include "ptcfem/assembly.hpp"
#include "ptcfem/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace ptcfem {

DorflerSplit phi_split(double theta, double final_residual, double coarse_split_scale) {
  using std::numbers::pi;
  double theta_C = theta * (0.5 + std::atan(final_residual / coarse_split_scale - 0.5 * pi) / pi);
  if (std::isnan(theta_C))
    theta_C = theta; // infinite residual
  theta_C = std::clamp(theta_C, 0.0, theta);
  return {theta_C, theta - theta_C};
}

namespace {

// Shortest prefix of `order` whose eta^2 sum reaches fraction * total.
void greedy_prefix(std::span<const int> order, std::span<const double> eta2, double fraction, double total,
                   std::vector<int>& out) {
  if (!(fraction > 0.0))
    return;
  const double target = fraction * total * (1.0 - 1e-12);
  double sum = 0.0;
  for (int t : order) {
    if (sum >= target)
      break;
    if (eta2[t] == 0.0)
      continue;
    out.push_back(t);
    sum += eta2[t];
  }
}

} // namespace

MarkedSet mark(const Mesh& mesh, std::span<const double> eta, double theta_F, double theta_C) {
  if (eta.size() != mesh.num_elements())
    throw DimensionError("one indicator per element expected");
  if (theta_F < 0.0 || theta_C < 0.0 || theta_F + theta_C > 1.0 + 1e-12)
    throw ConfigError("theta", "marking fractions must be nonnegative with sum at most one");

  MarkedSet out;
  const int n = static_cast<int>(eta.size());
  std::vector<double> eta2(eta.size());
  for (int t = 0; t < n; ++t)
    eta2[t] = eta[t] * eta[t];

  std::vector<int> by_size(static_cast<std::size_t>(n));
  std::iota(by_size.begin(), by_size.end(), 0);
  std::stable_sort(by_size.begin(), by_size.end(), [&](int a, int b) { return eta2[a] > eta2[b]; });
  // Sum in the same order the greedy scan uses, so theta = 1 selects every nonzero element.
  double total = 0.0;
  for (int t : by_size)
    total += eta2[t];

  if (total == 0.0) {
    out.nothing_to_mark = theta_F + theta_C > 0.0;
    return out;
  }

  std::vector<int> selected;
  greedy_prefix(by_size, eta2, theta_F, total, selected);

  if (theta_C > 0.0) {
    std::vector<int> by_coarseness = by_size;
    std::stable_sort(by_coarseness.begin(), by_coarseness.end(),
                     [&](int a, int b) { return mesh.generation(a) < mesh.generation(b); });
    greedy_prefix(by_coarseness, eta2, theta_C, total, selected);
    selected.push_back(by_size.front());
    selected.push_back(by_coarseness.front());
  }

  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  out.elements = std::move(selected);
  return out;
}

MarkedSet mark_coarsest(const Mesh& mesh) {
  MarkedSet out;
  const int g = mesh.min_generation();
  for (std::size_t t = 0; t < mesh.num_elements(); ++t)
    if (mesh.generation(static_cast<int>(t)) == g)
      out.elements.push_back(static_cast<int>(t));
  return out;
}

bool at_predicted_rate(double ratio, double gamma, double rate_tolerance) {
  const double predicted = 1.0 - 1.0 / gamma;
  return ratio >= predicted && ratio <= predicted + rate_tolerance;
}

double update_gamma(double gamma, const SolveOutcome& outcome, double rate_tolerance, double rate_slack) {
  const double predicted = 1.0 - 1.0 / gamma;
  double next = gamma;
  switch (outcome.exit_code) {
  case ExitCode::converged:
    if (gamma > 1.0) {
      const bool on_rate = outcome.final_ratio && at_predicted_rate(*outcome.final_ratio, gamma, rate_tolerance);
      next = on_rate ? gamma - 2.0 : gamma - 1.0;
    }
    break;
  case ExitCode::stalled_accept: {
    const double ratio = outcome.final_ratio.value_or(1.0);
    if (at_predicted_rate(ratio, gamma, rate_tolerance))
      next = gamma - 2.0;
    else if (ratio < predicted)
      next = gamma - 1.0;
    break;
  }
  case ExitCode::failed: {
    const double q_acc = 1.0 - 1.0 / (rate_slack * gamma);
    const bool converging_slowly = outcome.failure == FailureReason::max_iterations && outcome.final_ratio &&
                                   *outcome.final_ratio < q_acc;
    next = converging_slowly ? gamma + 2.0 : gamma + 1.0;
    break;
  }
  }
  return std::max(1.0, next);
}

void AdaptiveRunConfig::validate() const {
  solver.validate();
  if (initial_cells < 1)
    throw ConfigError("initial_n", "must be at least 1");
  if (!(theta > 0.0 && theta <= 1.0))
    throw ConfigError("theta", "must lie in (0, 1]");
  if (!(coarse_split_scale > 0.0))
    throw ConfigError("coarse_split_scale", "must be positive");
  if (!(rate_tolerance >= 0.0))
    throw ConfigError("rate_tolerance", "must be nonnegative");
  if (max_levels < 1)
    throw ConfigError("max_levels", "must be at least 1");
  if (max_elements < 1)
    throw ConfigError("max_elements", "must be at least 1");
}

std::vector<LevelReport> adaptive_solve(const AdaptiveRunConfig& config, const ProblemSpec& problem,
                                        const LevelCallback& on_level) {
  return adaptive_solve(config, problem, unit_square_mesh(config.initial_cells, config.initial_split), on_level);
}

std::vector<LevelReport> adaptive_solve(const AdaptiveRunConfig& config, const ProblemSpec& problem,
                                        Mesh initial_mesh, const LevelCallback& on_level) {
  config.validate();
  std::vector<LevelReport> reports;
  Mesh mesh = std::move(initial_mesh);
  DiscreteField x0(mesh.num_vertices(), 0.0);
  double gamma = config.solver.gamma;
  std::optional<double> previous_final;
  int converged_levels = 0;

  for (int level = 0; level < config.max_levels; ++level) {
    if (mesh.num_elements() > config.max_elements)
      break;
    const Assembler assembler(mesh);
    const SparseMatrix laplacian = assembler.laplacian();
    const bool zero_start = std::all_of(x0.begin(), x0.end(), [](double v) { return v == 0.0; });
    const SparseMatrix R = config.regularize_zero_start && zero_start
                               ? laplacian
                               : regularizer(assembler, x0, problem, laplacian);

    SolverConfig solver = config.solver;
    solver.gamma = gamma;
    if (solver.xbar == XbarChoice::previous_solution && level == 0)
      solver.xbar = XbarChoice::zero;
    const SolveOutcome outcome = solve_on_partition(assembler, problem, x0, solver, R, previous_final, level);
    const IndicatorField indicators = compute_indicators(assembler, outcome.solution, problem);

    LevelReport report;
    report.level = level;
    report.elements = mesh.num_elements();
    report.dofs = static_cast<std::size_t>(assembler.num_dofs());
    report.max_h = mesh.max_diameter();
    report.exit_code = outcome.exit_code;
    report.failure = outcome.failure;
    report.iterations = outcome.iterations();
    report.first_residual = outcome.residuals.front();
    report.final_residual = outcome.residuals.back();
    report.final_ratio = outcome.final_ratio;
    report.gamma = gamma;
    report.sigma_final = outcome.sigma_final;
    report.eta_total = indicators.eta_total;
    report.zeta_total = indicators.zeta_total;
    if (problem.exact)
      report.h1_error = h1_error(mesh, outcome.solution, problem);
    report.at_predicted_rate =
        outcome.final_ratio && at_predicted_rate(*outcome.final_ratio, gamma, config.rate_tolerance);

    MarkedSet marked;
    switch (outcome.exit_code) {
    case ExitCode::converged:
      report.theta_F = config.theta;
      marked = mark(mesh, indicators.eta, config.theta, 0.0);
      break;
    case ExitCode::stalled_accept: {
      const auto split = phi_split(config.theta, report.final_residual, config.coarse_split_scale);
      report.theta_C = split.theta_C;
      report.theta_F = split.theta_F;
      marked = mark(mesh, indicators.eta, split.theta_F, split.theta_C);
      break;
    }
    case ExitCode::failed:
      marked = mark_coarsest(mesh);
      break;
    }
    if (marked.elements.empty())
      marked = mark_coarsest(mesh);
    report.marked = marked.elements.size();

    reports.push_back(report);
    if (on_level)
      on_level(LevelData{reports.back(), mesh, outcome, indicators});

    gamma = update_gamma(gamma, outcome, config.rate_tolerance, config.solver.rate_slack);
    previous_final = outcome.exit_code == ExitCode::failed ? std::nullopt
                                                           : std::optional<double>(report.final_residual);
    if (outcome.exit_code == ExitCode::converged)
      ++converged_levels;
    if (config.stop_after_converged > 0 && converged_levels >= config.stop_after_converged)
      break;
    if (level + 1 == config.max_levels)
      break;

    RefineResult refined = refine(mesh, marked.elements);
    x0 = interpolate(mesh, refined.mesh, refined.parents, outcome.solution);
    mesh = std::move(refined.mesh);
  }
  return reports;
}

void write_level_header(std::ostream& os) {
  os << "level,elements,max_h,exit_code,iterations,first_residual,final_residual,final_ratio,gamma,"
        "sigma_final,eta_total,zeta_total,h1_error\n";
}

void write_level_row(std::ostream& os, const LevelReport& r) {
  const auto old_precision = os.precision(17);
  os << r.level << ',' << r.elements << ',' << r.max_h << ',' << to_string(r.exit_code) << ',' << r.iterations
     << ',' << r.first_residual << ',' << r.final_residual << ',';
  if (r.final_ratio)
    os << *r.final_ratio;
  os << ',' << r.gamma << ',' << r.sigma_final << ',' << r.eta_total << ',' << r.zeta_total << ',';
  if (r.h1_error)
    os << *r.h1_error;
  os << '\n';
  os.precision(old_precision);
}

} // namespace ptcfem
