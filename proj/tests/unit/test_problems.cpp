#include "ptcfem/error.hpp"
#include "ptcfem/problem.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ptcfem;

namespace {

constexpr double pi = std::numbers::pi;

// Strong form evaluated with finite differences of the flux kappa(u*) grad u*.
double f_oracle(const ProblemSpec& p, double x, double y) {
  const auto& u = p.exact->value;
  const double h = 1e-5;
  auto flux_x = [&](double X, double Y) { return p.kappa(u(X, Y)) * (u(X + h, Y) - u(X - h, Y)) / (2 * h); };
  auto flux_y = [&](double X, double Y) { return p.kappa(u(X, Y)) * (u(X, Y + h) - u(X, Y - h)) / (2 * h); };
  const double div = (flux_x(x + h, y) - flux_x(x - h, y)) / (2 * h) + (flux_y(x, y + h) - flux_y(x, y - h)) / (2 * h);
  const double s = u(x, y);
  const Vec2 b = p.b(s);
  const double ux = (u(x + h, y) - u(x - h, y)) / (2 * h), uy = (u(x, y + h) - u(x, y - h)) / (2 * h);
  return -div + b[0] * ux + b[1] * uy;
}

} // namespace

TEST_CASE("coefficient values") {
  const auto p = example_1(6e-4);
  CHECK(p.kappa(0.5) == doctest::Approx(1.0 + 1.0 / 6e-4));
  CHECK(p.kappa(0.0) == doctest::Approx(1.0 + 1.0 / (6e-4 + 0.25)));
  CHECK(p.kappa_prime(0.5) == 0.0);
  CHECK(p.b(0.75)[0] == doctest::Approx(0.25));
  CHECK(p.b(0.75)[1] == doctest::Approx(0.0625));
  const auto q = example_3(6e-4);
  CHECK(q.kappa(0.8) == doctest::Approx(1.0 + 1.0 / (6e-4 + 0.09) + 1.0 / 6e-4));
  CHECK(q.convection_free);
  CHECK(q.b(0.3)[0] == 0.0);
  CHECK(linear_poisson().kappa(123.0) == 1.0);
  CHECK(example_1(6e-4, 0.4, 2.0).kappa(0.4) == doctest::Approx(2.0 + 1.0 / 6e-4));
}

TEST_CASE("derivatives agree with finite differences") {
  const ProblemSpec problems[] = {linear_poisson(), example_1(6e-4), example_2(2e-4), example_3(6e-4)};
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> S(-0.5, 1.5);
  for (const auto& p : problems)
    for (int i = 0; i < 50; ++i) {
      const double s = S(rng), h = 1e-7;
      INFO(p.name << " s=" << s);
      const double dk = (p.kappa(s + h) - p.kappa(s - h)) / (2 * h);
      CHECK(p.kappa_prime(s) == doctest::Approx(dk).epsilon(1e-5).scale(1.0));
      for (int c = 0; c < 2; ++c) {
        const double db = (p.b(s + h)[c] - p.b(s - h)[c]) / (2 * h);
        CHECK(p.b_prime(s)[c] == doctest::Approx(db).epsilon(1e-6).scale(1.0));
      }
    }
}

TEST_CASE("manufactured load matches the strong form of the exact solution") {
  const ProblemSpec problems[] = {linear_poisson(), example_1(6e-4), example_2(6e-4), example_3(6e-4),
                                  example_1(1e-2)};
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> X(0.05, 0.95);
  for (const auto& p : problems)
    for (int i = 0; i < 40; ++i) {
      const double x = X(rng), y = X(rng);
      const double expected = f_oracle(p, x, y);
      INFO(p.name << " at " << x << "," << y);
      CHECK(p.f(x, y) == doctest::Approx(expected).epsilon(1e-4).scale(1.0));
    }
}

TEST_CASE("exact solutions") {
  const auto s1 = sine_solution(1.0), s2 = sine_solution(2.0);
  CHECK(s1.value(0.5, 0.5) == doctest::Approx(1.0));
  CHECK(s2.value(0.25, 0.25) == doctest::Approx(1.0));
  CHECK(s2.value(0.5, 0.3) == doctest::Approx(0.0).scale(1.0));
  CHECK(s1.laplacian(0.3, 0.6) == doctest::Approx(-2 * pi * pi * s1.value(0.3, 0.6)));
  CHECK(s1.gradient(0.5, 0.5)[0] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("problem lookup and validation") {
  CHECK(make_problem("linear_poisson", {}).name == "linear_poisson");
  CHECK(make_problem("example_2", {{"epsilon", 1e-3}}).parameters.at("epsilon") == 1e-3);
  CHECK(make_problem("example_3", {{"epsilon", 1e-3}, {"c", 0.7}}).parameters.at("c") == 0.7);
  try {
    (void)make_problem("example_1", {});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "epsilon");
  }
  try {
    (void)make_problem("p_laplacian", {});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "problem");
  }
  CHECK_THROWS_AS(example_1(-1.0), ConfigError);
  CHECK_THROWS_AS(example_1(1e-3, 0.5, 0.0), ConfigError);
  CHECK_THROWS_AS(manufactured(
                      "negative", [](double s) { return 0.5 - s; }, [](double) { return -1.0; },
                      [](double) { return Vec2{0, 0}; }, [](double) { return Vec2{0, 0}; }, sine_solution(1.0)),
                  ConfigError);
}
