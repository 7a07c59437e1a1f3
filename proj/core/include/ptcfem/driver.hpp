#ifndef PTCFEM_DRIVER_HPP
#define PTCFEM_DRIVER_HPP

#include "ptcfem/adaptive.hpp"
#include "ptcfem/problem.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace ptcfem {

/// Batch run description, read from a flat "key = value" file. '#' starts a
/// comment. Recognized keys:
///
///   problem, epsilon, a, c, k, initial_n, split, gamma, theta, sigma0, K0,
///   tol, M, max_iterations, max_levels, max_elements, stop_after_converged,
///   xbar, variant, rate_tolerance, coarse_split_scale, zero_start_regularizer,
///   output_dir,
///   dump_levels, seed
struct RunConfig {
  std::string problem = "linear_poisson";
  std::map<std::string, double> problem_parameters;
  AdaptiveRunConfig adaptive;
  std::filesystem::path output_dir = ".";
  std::set<int> dump_levels;
  std::uint64_t seed = 0;

  /// Checks every range and builds the problem once; throws ConfigError.
  void validate() const;
};

RunConfig parse_run_config(std::istream& is);
RunConfig load_run_config(const std::filesystem::path& path);

/// Runs the adaptive loop and writes levels.csv, iterations.csv, and
/// mesh_L<k>.txt / sol_L<k>.txt for the requested levels.
std::vector<LevelReport> run(const RunConfig& config);

/// Parsed levels.csv row.
struct LevelRow {
  int level = 0;
  std::size_t elements = 0;
  double max_h = 0.0;
  std::string exit_code;
  int iterations = 0;
  double first_residual = 0.0;
  double final_residual = 0.0;
  std::optional<double> final_ratio;
  double gamma = 0.0;
  double sigma_final = 0.0;
  double eta_total = 0.0;
  double zeta_total = 0.0;
  std::optional<double> h1_error;
};

/// Throws Error on a missing header or malformed rows.
std::vector<LevelRow> parse_levels_csv(std::istream& is);

/// Text table with columns Level, |g(u_k)|, final ratio, sigma_k, gamma_k.
std::string table_report(std::span<const LevelRow> rows);

/// CSV "elements,h1_error,eta_total" for log-log plots against n^(-1/2).
/// Throws Error if a row has no H1 error.
std::string error_curve(std::span<const LevelRow> rows);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

} // namespace ptcfem

#endif // PTCFEM_DRIVER_HPP
