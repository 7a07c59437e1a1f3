#include "ptcfem/problem.hpp"

#include "ptcfem/error.hpp"

#include <cmath>
#include <numbers>

namespace ptcfem {

namespace {

using std::numbers::pi;

// kappa contribution 1/(eps + (s - center)^2) and its derivative.
double bump(double s, double eps, double center) {
  const double d = s - center;
  return 1.0 / (eps + d * d);
}

double bump_prime(double s, double eps, double center) {
  const double d = s - center;
  const double q = eps + d * d;
  return -2.0 * d / (q * q);
}

void require_positive(const std::string& field, double value) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw ConfigError(field, "must be a positive finite number");
}

} // namespace

ExactSolution sine_solution(double frequency) {
  const double w = frequency * pi;
  return {
      [w](double x, double y) { return std::sin(w * x) * std::sin(w * y); },
      [w](double x, double y) {
        return Vec2{w * std::cos(w * x) * std::sin(w * y), w * std::sin(w * x) * std::cos(w * y)};
      },
      [w](double x, double y) { return -2.0 * w * w * std::sin(w * x) * std::sin(w * y); },
  };
}

ProblemSpec manufactured(std::string name, std::function<double(double)> kappa,
                         std::function<double(double)> kappa_prime, std::function<Vec2(double)> b,
                         std::function<Vec2(double)> b_prime, ExactSolution exact, bool convection_free) {
  // kappa must stay positive on the range of u*; sample it on a grid.
  constexpr int samples = 32;
  for (int j = 0; j <= samples; ++j)
    for (int i = 0; i <= samples; ++i) {
      const double s = exact.value(static_cast<double>(i) / samples, static_cast<double>(j) / samples);
      const double k = kappa(s);
      if (!(k > 0.0))
        throw ConfigError("kappa", "must be positive on the range of the exact solution (kappa(" +
                                       std::to_string(s) + ") = " + std::to_string(k) + ")");
    }

  ProblemSpec p;
  p.name = std::move(name);
  p.kappa = std::move(kappa);
  p.kappa_prime = std::move(kappa_prime);
  p.b = std::move(b);
  p.b_prime = std::move(b_prime);
  p.convection_free = convection_free;
  p.f = [kappa = p.kappa, kappa_prime = p.kappa_prime, b = p.b, exact](double x, double y) {
    const double u = exact.value(x, y);
    const Vec2 g = exact.gradient(x, y);
    const Vec2 bu = b(u);
    return -kappa_prime(u) * (g[0] * g[0] + g[1] * g[1]) - kappa(u) * exact.laplacian(x, y) + bu[0] * g[0] +
           bu[1] * g[1];
  };
  p.exact = std::move(exact);
  return p;
}

ProblemSpec linear_poisson() {
  auto p = manufactured(
      "linear_poisson", [](double) { return 1.0; }, [](double) { return 0.0; },
      [](double) { return Vec2{0.0, 0.0}; }, [](double) { return Vec2{0.0, 0.0}; }, sine_solution(1.0), true);
  p.f = [](double x, double y) { return 2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y); };
  return p;
}

namespace {

ProblemSpec convection_example(std::string name, double epsilon, double a, double k, double frequency) {
  require_positive("epsilon", epsilon);
  require_positive("k", k);
  auto p = manufactured(
      std::move(name), [=](double s) { return k + bump(s, epsilon, a); },
      [=](double s) { return bump_prime(s, epsilon, a); },
      [=](double s) { return Vec2{s - a, (s - a) * (s - a)}; },
      [=](double s) { return Vec2{1.0, 2.0 * (s - a)}; }, sine_solution(frequency));
  p.parameters = {{"epsilon", epsilon}, {"a", a}, {"k", k}};
  return p;
}

} // namespace

ProblemSpec example_1(double epsilon, double a, double k) {
  return convection_example("example_1", epsilon, a, k, 1.0);
}

ProblemSpec example_2(double epsilon, double a, double k) {
  return convection_example("example_2", epsilon, a, k, 2.0);
}

ProblemSpec example_3(double epsilon, double a, double c, double k) {
  require_positive("epsilon", epsilon);
  require_positive("k", k);
  auto p = manufactured(
      "example_3", [=](double s) { return k + bump(s, epsilon, a) + bump(s, epsilon, c); },
      [=](double s) { return bump_prime(s, epsilon, a) + bump_prime(s, epsilon, c); },
      [](double) { return Vec2{0.0, 0.0}; }, [](double) { return Vec2{0.0, 0.0}; }, sine_solution(1.0), true);
  p.parameters = {{"epsilon", epsilon}, {"a", a}, {"c", c}, {"k", k}};
  return p;
}

ProblemSpec make_problem(const std::string& name, const std::map<std::string, double>& parameters) {
  auto get = [&](const std::string& key, std::optional<double> fallback) {
    if (const auto it = parameters.find(key); it != parameters.end())
      return it->second;
    if (!fallback)
      throw ConfigError(key, "required by problem " + name);
    return *fallback;
  };
  if (name == "linear_poisson")
    return linear_poisson();
  if (name == "example_1")
    return example_1(get("epsilon", std::nullopt), get("a", 0.5), get("k", 1.0));
  if (name == "example_2")
    return example_2(get("epsilon", std::nullopt), get("a", 0.5), get("k", 1.0));
  if (name == "example_3")
    return example_3(get("epsilon", std::nullopt), get("a", 0.5), get("c", 0.8), get("k", 1.0));
  throw ConfigError("problem", "unknown problem name '" + name + "'");
}

} // namespace ptcfem
