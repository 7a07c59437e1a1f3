#ifndef PTCFEM_PROBLEM_HPP
#define PTCFEM_PROBLEM_HPP

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>

namespace ptcfem {

using Vec2 = std::array<double, 2>;

/// Known solution of a manufactured problem.
struct ExactSolution {
  std::function<double(double, double)> value;
  std::function<Vec2(double, double)> gradient;
  std::function<double(double, double)> laplacian;
};

/// Data of g(u) = -div(kappa(u) grad u) + b(u) . grad u - f on [0,1]^2 with
/// u = 0 on the boundary. kappa and b depend on the solution value only.
struct ProblemSpec {
  std::string name;
  std::function<double(double)> kappa;
  std::function<double(double)> kappa_prime;
  std::function<Vec2(double)> b;
  std::function<Vec2(double)> b_prime;
  std::function<double(double, double)> f;
  std::optional<ExactSolution> exact;
  std::map<std::string, double> parameters;
  /// b identically zero; lets assembly skip the convection terms.
  bool convection_free = false;
};

/// u*(x, y) = sin(w pi x) sin(w pi y) with its gradient and Laplacian.
ExactSolution sine_solution(double frequency);

/// Closes a problem by manufacturing f from the strong form:
/// f = -kappa'(u*)|grad u*|^2 - kappa(u*) lap u* + b(u*) . grad u*.
/// Throws ConfigError if kappa is not positive on the range of u*.
ProblemSpec manufactured(std::string name, std::function<double(double)> kappa,
                         std::function<double(double)> kappa_prime, std::function<Vec2(double)> b,
                         std::function<Vec2(double)> b_prime, ExactSolution exact, bool convection_free = false);

/// kappa = 1, b = 0, u* = sin(pi x) sin(pi y).
ProblemSpec linear_poisson();

/// kappa(s) = k + 1/(eps + (s-a)^2), b(s) = (s-a, (s-a)^2), u* = sin(pi x) sin(pi y).
ProblemSpec example_1(double epsilon, double a = 0.5, double k = 1.0);

/// Operator of example_1 with u* = sin(2 pi x) sin(2 pi y).
ProblemSpec example_2(double epsilon, double a = 0.5, double k = 1.0);

/// kappa(s) = k + 1/(eps + (s-a)^2) + 1/(eps + (s-c)^2), b = 0, u* = sin(pi x) sin(pi y).
ProblemSpec example_3(double epsilon, double a = 0.5, double c = 0.8, double k = 1.0);

/// Looks a problem up by name ("linear_poisson", "example_1", "example_2",
/// "example_3"). Parameters not listed fall back to defaults; "epsilon" is
/// required for the examples. Throws ConfigError.
ProblemSpec make_problem(const std::string& name, const std::map<std::string, double>& parameters);

} // namespace ptcfem

#endif // PTCFEM_PROBLEM_HPP
