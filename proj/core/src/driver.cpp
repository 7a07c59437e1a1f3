#include "ptcfem/driver.hpp"

#include "ptcfem/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ptcfem {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  std::size_t used = 0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  if (used != text.size())
    throw ConfigError(key, "expected a number, got '" + text + "'");
  return value;
}

long long to_integer(const std::string& key, const std::string& text) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep))
    out.push_back(trim(field));
  if (!line.empty() && line.back() == sep)
    out.emplace_back();
  return out;
}

} // namespace

RunConfig parse_run_config(std::istream& is) {
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto& ad = config.adaptive;
    auto& sv = ad.solver;
    if (key == "problem")
      config.problem = value;
    else if (key == "epsilon" || key == "a" || key == "c" || key == "k")
      config.problem_parameters[key] = to_double(key, value);
    else if (key == "initial_n")
      ad.initial_cells = static_cast<int>(to_integer(key, value));
    else if (key == "split") {
      if (value == "crisscross")
        ad.initial_split = SquareSplit::crisscross;
      else if (value == "diagonal")
        ad.initial_split = SquareSplit::diagonal;
      else
        throw ConfigError(key, "expected 'crisscross' or 'diagonal'");
    } else if (key == "gamma")
      sv.gamma = to_double(key, value);
    else if (key == "theta")
      ad.theta = to_double(key, value);
    else if (key == "sigma0")
      sv.sigma0 = to_double(key, value);
    else if (key == "K0")
      sv.K0 = to_double(key, value);
    else if (key == "tol")
      sv.tol = to_double(key, value);
    else if (key == "M")
      sv.rate_slack = to_double(key, value);
    else if (key == "max_iterations")
      sv.max_iterations = static_cast<int>(to_integer(key, value));
    else if (key == "max_levels")
      ad.max_levels = static_cast<int>(to_integer(key, value));
    else if (key == "max_elements") {
      const auto n = to_integer(key, value);
      if (n < 1)
        throw ConfigError(key, "must be at least 1");
      ad.max_elements = static_cast<std::size_t>(n);
    } else if (key == "stop_after_converged")
      ad.stop_after_converged = static_cast<int>(to_integer(key, value));
    else if (key == "xbar")
      sv.xbar = parse_xbar(value);
    else if (key == "variant")
      sv.variant = parse_variant(value);
    else if (key == "rate_tolerance")
      ad.rate_tolerance = to_double(key, value);
    else if (key == "coarse_split_scale")
      ad.coarse_split_scale = to_double(key, value);
    else if (key == "zero_start_regularizer") {
      if (value == "global")
        ad.regularize_zero_start = true;
      else if (value == "none")
        ad.regularize_zero_start = false;
      else
        throw ConfigError(key, "expected 'global' or 'none'");
    } else if (key == "output_dir")
      config.output_dir = value;
    else if (key == "dump_levels") {
      for (const auto& item : split(value, ','))
        if (!item.empty())
          config.dump_levels.insert(static_cast<int>(to_integer(key, item)));
    } else if (key == "seed")
      config.seed = static_cast<std::uint64_t>(to_integer(key, value));
    else
      throw ConfigError(key, "unknown configuration key");
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("config", "cannot open " + path.string());
  return parse_run_config(in);
}

void RunConfig::validate() const {
  adaptive.validate();
  if (adaptive.stop_after_converged < 0)
    throw ConfigError("stop_after_converged", "must be nonnegative");
  (void)make_problem(problem, problem_parameters);
}

std::vector<LevelReport> run(const RunConfig& config) {
  config.validate();
  const ProblemSpec problem = make_problem(config.problem, config.problem_parameters);
  std::filesystem::create_directories(config.output_dir);
  std::ofstream levels(config.output_dir / "levels.csv");
  std::ofstream iterations(config.output_dir / "iterations.csv");
  if (!levels || !iterations)
    throw Error("cannot write to " + config.output_dir.string());
  write_level_header(levels);
  write_iteration_header(iterations);

  auto on_level = [&](const LevelData& data) {
    write_level_row(levels, data.report);
    write_iteration_rows(iterations, data.outcome.log);
    levels.flush();
    iterations.flush();
    if (config.dump_levels.count(data.report.level)) {
      const std::string suffix = "_L" + std::to_string(data.report.level) + ".txt";
      std::ofstream mesh_out(config.output_dir / ("mesh" + suffix));
      write_mesh(mesh_out, data.mesh);
      std::ofstream sol_out(config.output_dir / ("sol" + suffix));
      write_field(sol_out, data.outcome.solution);
    }
  };
  return adaptive_solve(config.adaptive, problem, on_level);
}

std::vector<LevelRow> parse_levels_csv(std::istream& is) {
  static const std::vector<std::string> expected{
      "level",  "elements",    "max_h",     "exit_code",  "iterations", "first_residual", "final_residual",
      "final_ratio", "gamma", "sigma_final", "eta_total", "zeta_total", "h1_error"};
  std::string line;
  if (!std::getline(is, line) || split(trim(line), ',') != expected)
    throw Error("levels CSV: missing or unexpected header");
  std::vector<LevelRow> rows;
  int line_no = 1;
  auto number = [&](const std::string& text) {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size())
        throw Error("");
      return v;
    } catch (const std::exception&) {
      throw Error("levels CSV line " + std::to_string(line_no) + ": bad number '" + text + "'");
    }
  };
  auto optional_number = [&](const std::string& text) -> std::optional<double> {
    if (text.empty())
      return std::nullopt;
    return number(text);
  };
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty())
      continue;
    const auto f = split(line, ',');
    if (f.size() != expected.size())
      throw Error("levels CSV line " + std::to_string(line_no) + ": expected " +
                  std::to_string(expected.size()) + " fields");
    LevelRow row;
    row.level = static_cast<int>(number(f[0]));
    row.elements = static_cast<std::size_t>(number(f[1]));
    row.max_h = number(f[2]);
    row.exit_code = f[3];
    (void)parse_exit_code(row.exit_code);
    row.iterations = static_cast<int>(number(f[4]));
    row.first_residual = number(f[5]);
    row.final_residual = number(f[6]);
    row.final_ratio = optional_number(f[7]);
    row.gamma = number(f[8]);
    row.sigma_final = number(f[9]);
    row.eta_total = number(f[10]);
    row.zeta_total = number(f[11]);
    row.h1_error = optional_number(f[12]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string table_report(std::span<const LevelRow> rows) {
  std::ostringstream os;
  os << std::setw(6) << "Level" << "  " << std::setw(12) << "|g(u_k)|" << "  " << std::setw(11) << "final ratio"
     << "  " << std::setw(8) << "sigma_k" << "  " << std::setw(7) << "gamma_k" << '\n';
  for (const auto& r : rows) {
    std::ostringstream ratio;
    if (r.final_ratio)
      ratio << std::setprecision(2) << (*r.final_ratio < 0.01 ? std::scientific : std::fixed) << *r.final_ratio;
    std::ostringstream residual;
    residual << std::setprecision(1) << (r.final_residual < 0.1 ? std::scientific : std::fixed)
             << r.final_residual;
    os << std::setw(6) << r.level << "  " << std::setw(12) << residual.str() << "  " << std::setw(11)
       << ratio.str() << "  " << std::setw(8) << std::fixed << std::setprecision(3) << r.sigma_final << "  "
       << std::setw(7) << std::defaultfloat << std::setprecision(6) << r.gamma << '\n';
  }
  return os.str();
}

std::string error_curve(std::span<const LevelRow> rows) {
  std::ostringstream os;
  os.precision(17);
  os << "elements,h1_error,eta_total\n";
  for (const auto& r : rows) {
    if (!r.h1_error)
      throw Error("level " + std::to_string(r.level) + " has no H1 error");
    os << r.elements << ',' << *r.h1_error << ',' << r.eta_total << '\n';
  }
  return os.str();
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw DimensionError("slope needs at least two matching samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace ptcfem
