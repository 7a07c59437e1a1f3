// Acceptance suite: one PASS/FAIL line per criterion.
#include "helpers.hpp"

#include "ptcfem/adaptive.hpp"
#include "ptcfem/driver.hpp"
#include "ptcfem/indicators.hpp"
#include "ptcfem/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

using namespace ptcfem;
using testing::dense;
using testing::to_eigen;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << what << " | " << detail << std::endl;
  if (!pass)
    ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Level {
  LevelReport report;
  std::vector<double> residuals;
  double seconds = 0.0;
};

std::vector<Level> run_levels(const AdaptiveRunConfig& config, const ProblemSpec& problem) {
  std::vector<Level> levels;
  auto last = std::chrono::steady_clock::now();
  adaptive_solve(config, problem, [&](const LevelData& d) {
    const auto now = std::chrono::steady_clock::now();
    levels.push_back({d.report, d.outcome.residuals, std::chrono::duration<double>(now - last).count()});
    last = now;
  });
  return levels;
}

constexpr int tail_length = 6;

// Least-squares slope of log(H1 error) against log(elements) over the last levels.
double tail_slope(const std::vector<Level>& levels) {
  std::vector<double> n, e;
  for (std::size_t k = levels.size() - tail_length; k < levels.size(); ++k) {
    n.push_back(static_cast<double>(levels[k].report.elements));
    e.push_back(*levels[k].report.h1_error);
  }
  return loglog_slope(n, e);
}

bool tail_converged(const std::vector<Level>& levels) {
  if (levels.size() < tail_length)
    return false;
  for (std::size_t k = levels.size() - tail_length; k < levels.size(); ++k)
    if (levels[k].report.exit_code != ExitCode::converged)
      return false;
  return true;
}

void criteria_from_example_run() {
  AdaptiveRunConfig config;
  config.max_levels = 40;
  config.max_elements = 600000;
  const auto levels = run_levels(config, example_1(6e-4));
  std::cout << "# example 1, eps = 6e-4: " << levels.size() << " levels, final mesh "
            << levels.back().report.elements << " elements" << std::endl;
  for (const auto& l : levels)
    std::cout << "#   L" << l.report.level << " n=" << l.report.elements << " " << to_string(l.report.exit_code)
              << " r=" << fmt("%.3g", l.report.final_residual)
              << " ratio=" << (l.report.final_ratio ? fmt("%.3f", *l.report.final_ratio) : std::string("-"))
              << " gamma=" << l.report.gamma << " H1=" << fmt("%.4g", l.report.h1_error.value_or(NAN))
              << " t=" << fmt("%.1fs", l.seconds) << std::endl;

  // 1: flagged pre-asymptotic exits sit on the predicted rate; desk-scale timing.
  {
    int flagged = 0;
    double worst = 0.0, slowest = 0.0;
    std::string anchor = "none";
    for (const auto& l : levels) {
      if (l.report.elements <= 100000)
        slowest = std::max(slowest, l.seconds);
      if (l.report.exit_code != ExitCode::stalled_accept || !l.report.at_predicted_rate)
        continue;
      ++flagged;
      worst = std::max(worst, std::abs(*l.report.final_ratio - (1.0 - 1.0 / l.report.gamma)));
      if (l.report.gamma == 3.0)
        anchor = fmt("%.3f", *l.report.final_ratio);
    }
    report(1, flagged > 0 && worst <= 0.05 && slowest <= 300.0, "rate law q = 1 - 1/gamma on at-rate levels",
           std::to_string(flagged) + " flagged levels, max |ratio - q| = " + fmt("%.4f", worst) +
               ", gamma=3 ratio " + anchor + " (reference 0.67), slowest level <= 1e5 elements " +
               fmt("%.1f s", slowest));
  }

  // 2: accepted solves decrease strictly after their first decrease.
  {
    int accepted = 0, violations = 0;
    for (const auto& l : levels) {
      if (l.report.exit_code == ExitCode::failed)
        continue;
      ++accepted;
      const auto& r = l.residuals;
      std::size_t start = 1;
      while (start < r.size() && !(r[start] < r[start - 1]))
        ++start;
      for (std::size_t i = start + 1; i < r.size(); ++i)
        if (!(r[i] < r[i - 1]))
          ++violations;
    }
    const double r0 = levels.front().report.first_residual;
    const bool magnitude = r0 >= 1.5e3 / 5 && r0 <= 1.5e3 * 5;
    report(2, accepted > 0 && violations == 0 && magnitude, "monotone residuals in accepted solves",
           std::to_string(accepted) + " accepted solves, " + std::to_string(violations) +
               " non-decreasing steps, first residual " + fmt("%.1f", r0) + " (reference 1.5e3, factor 5)");
  }

  // 3: a converged level at gamma = 1 within 40 levels.
  {
    const auto it = std::find_if(levels.begin(), levels.end(), [](const Level& l) {
      return l.report.exit_code == ExitCode::converged && l.report.final_residual <= 1e-7 &&
             l.report.gamma == 1.0;
    });
    const bool pass = it != levels.end() && it->report.level < 40;
    report(3, pass, "terminal convergence with gamma = 1",
           pass ? "first at level " + std::to_string(it->report.level) + ", residual " +
                      fmt("%.2e", it->report.final_residual)
                : std::string("no converged gamma = 1 level"));
  }

  // 4: quadratic tail: the last log gap grows at least 1.8x over the previous one.
  {
    bool pass = tail_converged(levels);
    double worst = INFINITY;
    if (pass)
      for (std::size_t k = levels.size() - tail_length; k < levels.size(); ++k) {
        const auto& r = levels[k].residuals;
        if (r.size() < 3 || levels[k].report.gamma != 1.0) {
          pass = false;
          continue;
        }
        const std::size_t n = r.size() - 1;
        const double g1 = std::log(r[n - 2] / r[n - 1]);
        const double g2 = std::log(r[n - 1] / r[n]);
        worst = std::min(worst, g2 / g1);
      }
    pass = pass && worst >= 1.8;
    report(4, pass, "asymptotic quadratic convergence at gamma = 1",
           "min log-gap growth over the last " + std::to_string(tail_length) + " levels " + fmt("%.3f", worst));
  }

  // 5: H1 slope on the tail, plus the transient error increase.
  {
    const bool converged = tail_converged(levels);
    const double slope = converged ? tail_slope(levels) : NAN;
    double early_max = 0.0;
    for (std::size_t k = 0; k < std::min<std::size_t>(8, levels.size()); ++k)
      early_max = std::max(early_max, levels[k].report.h1_error.value_or(0.0));
    const double e0 = *levels.front().report.h1_error;

    AdaptiveRunConfig control;
    control.solver.gamma = 1.0;
    control.max_levels = 40;
    control.max_elements = 300000;
    const auto poisson = run_levels(control, linear_poisson());
    const bool control_converged = tail_converged(poisson);
    const double control_slope = control_converged ? tail_slope(poisson) : NAN;

    const bool pass = converged && control_converged && slope >= -0.60 && slope <= -0.40 &&
                      control_slope >= -0.60 && control_slope <= -0.40 && early_max > e0;
    report(5, pass, "H1 error slope against element count",
           "example slope " + fmt("%.3f", slope) + ", Poisson control slope " + fmt("%.3f", control_slope) +
               ", level-0 error " + fmt("%.3f", e0) + ", max over first 8 levels " + fmt("%.3f", early_max));
  }
}

std::vector<ProblemSpec> example_problems() { return {example_1(6e-4), example_2(6e-4), example_3(6e-4)}; }

double max_diff(const Vector& a, const Vector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

void criterion_6() {
  std::mt19937 rng(601);
  const auto problems = example_problems();
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto& p = problems[trial % 3];
    const Mesh m = testing::randomly_refined(3, SquareSplit::crisscross, 2, 0.3, rng);
    const Assembler A(m);
    const auto u = testing::random_field(m, rng, -0.1, 1.1);
    const auto J = A.jacobian(u, p);
    const auto Jbar = A.jacobian(DiscreteField(m.num_vertices(), 0.0), p);
    const auto R = regularizer(A, u, p, A.laplacian());
    const auto g = A.residual(u, p);
    const double alpha = 0.01 + trial * 0.7, gamma = 1.0 + trial % 11;
    const auto split = step_system(Variant::sigma_split_newmark, alpha, R, J, &Jbar, gamma, 1.0, g);
    const auto newmark = step_system(Variant::newmark, alpha, R, J, nullptr, gamma, 1.0, g);
    const auto nm1 = step_system(Variant::newmark, alpha, R, J, nullptr, 1.0, 1.0, g);
    const auto be = step_system(Variant::backward_euler, alpha, R, J, nullptr, 1.0, 1.0, g);
    worst = std::max(worst, max_diff(split, newmark) / (1.0 + norm2(newmark)));
    worst = std::max(worst, max_diff(nm1, be) / (1.0 + norm2(be)));
  }
  report(6, worst <= 1e-12, "reduction chain sigma-split(1) = Newmark, Newmark(1) = backward Euler",
         "20 assembled systems, max relative difference " + fmt("%.2e", worst));
}

void criterion_7() {
  std::mt19937 rng(701);
  double worst = 0.0;
  for (const auto& p : example_problems()) {
    const Mesh m = testing::randomly_refined(3, SquareSplit::crisscross, 2, 0.3, rng);
    const Assembler A(m);
    const int n = A.num_dofs();
    for (int trial = 0; trial < 10; ++trial) {
      const auto u = testing::random_field(m, rng, -0.2, 1.2);
      const Eigen::MatrixXd J = dense(A.jacobian(u, p));
      Eigen::MatrixXd F(n, n);
      const double h = 1e-7;
      for (int j = 0; j < n; ++j) {
        DiscreteField up = u, um = u;
        up[A.dofs().dof_to_vertex[j]] += h;
        um[A.dofs().dof_to_vertex[j]] -= h;
        F.col(j) = (to_eigen(A.residual(up, p)) - to_eigen(A.residual(um, p))) / (2 * h);
      }
      worst = std::max(worst, (J - F).norm() / F.norm());
    }
  }
  report(7, worst <= 1e-5, "Jacobian against central differences",
         "3 problems x 10 fields, max relative error " + fmt("%.2e", worst));
}

void criterion_8() {
  std::mt19937 rng(801);
  const auto problems = example_problems();
  double worst = 0.0;
  for (int trial = 0; trial < 12; ++trial) {
    const auto& p = problems[trial % 3];
    const Mesh m = testing::randomly_refined(2, SquareSplit::crisscross, 1, 0.4, rng);
    const Assembler A(m);
    const auto u = testing::random_field(m, rng, 0.0, 1.0);
    const Eigen::MatrixXd J = dense(A.jacobian(u, p));
    std::vector<char> active(A.num_dofs());
    for (auto& a : active)
      a = rng() % 2;
    const auto R = masked_laplacian(A.laplacian(), active);
    const Eigen::MatrixXd Rd = dense(R);
    const auto g = A.residual(u, p);
    const Eigen::VectorXd gd = to_eigen(g);
    const double alpha = std::pow(10.0, -2.0 + trial % 5), gamma = 1.0 + 2.0 * (trial % 4);
    // Gradients of |Jw + g|^2 + alpha |Rw|^2 and |Jw + g/gamma|^2 + (alpha/gamma) |Rw|^2.
    auto grad_be = [&](const Eigen::VectorXd& w) {
      return Eigen::VectorXd(2 * J.transpose() * (J * w + gd) + 2 * alpha * Rd.transpose() * (Rd * w));
    };
    auto grad_nm = [&](const Eigen::VectorXd& w) {
      return Eigen::VectorXd(2 * J.transpose() * (J * w + gd / gamma) +
                             2 * alpha / gamma * Rd.transpose() * (Rd * w));
    };
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(A.num_dofs());
    const Eigen::VectorXd w_be = to_eigen(step_system(Variant::normal_equations_be, alpha, R, A.jacobian(u, p),
                                                      nullptr, gamma, 1.0, g));
    const Eigen::VectorXd w_nm = to_eigen(step_system(Variant::normal_equations_newmark, alpha, R,
                                                      A.jacobian(u, p), nullptr, gamma, 1.0, g));
    worst = std::max(worst, grad_be(w_be).norm() / grad_be(zero).norm());
    worst = std::max(worst, grad_nm(w_nm).norm() / grad_nm(zero).norm());
  }
  report(8, worst <= 1e-6, "normal-equations steps are Tikhonov minimizers",
         "12 assembled instances, max |grad G(w)| / |grad G(0)| = " + fmt("%.2e", worst));
}

void criterion_9() {
  const Mesh base = unit_square_mesh(2, SquareSplit::diagonal);
  const std::vector<int> marked{0, 5};
  const Mesh m = refine(base, marked).mesh;
  const int n = static_cast<int>(m.num_elements());
  std::mt19937 rng(901);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int mismatches = 0;
  for (int draw = 0; draw < 100; ++draw) {
    std::vector<double> eta(n), eta2(n);
    for (int t = 0; t < n; ++t) {
      eta[t] = draw % 5 == 0 ? std::floor(U(rng) * 3) + 1 : std::exp(4 * U(rng) - 2);
      eta2[t] = eta[t] * eta[t];
    }
    double total = 0.0;
    for (double e : eta2)
      total += e;
    const double theta = 0.05 + 0.9 * U(rng);
    int least = n;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i))
          s += eta2[i];
      if (s >= theta * total * (1 - 1e-12))
        least = std::min(least, std::popcount(mask));
    }
    const auto fine = mark(m, eta, theta, 0.0);
    double covered = 0.0;
    for (int t : fine.elements)
      covered += eta2[t];
    if (static_cast<int>(fine.elements.size()) != least || covered < theta * total * (1 - 1e-12))
      ++mismatches;

    const double theta_C = theta * U(rng);
    const auto split = mark(m, eta, theta - theta_C, theta_C);
    const int global_max = static_cast<int>(std::max_element(eta.begin(), eta.end()) - eta.begin());
    int coarse_max = -1;
    for (int t = 0; t < n; ++t)
      if (m.generation(t) == m.min_generation() && (coarse_max < 0 || eta[t] > eta[coarse_max]))
        coarse_max = t;
    auto has = [&](int t) { return std::binary_search(split.elements.begin(), split.elements.end(), t); };
    if (!has(global_max) || !has(coarse_max))
      ++mismatches;
  }
  report(9, n <= 12 && mismatches == 0, "Dorfler marking against exhaustive search",
         std::to_string(n) + " elements, 100 draws, " + std::to_string(mismatches) + " mismatches");
}

void criterion_10() {
  std::mt19937 rng(1001);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int mismatches = 0;
  double min_eig = INFINITY;
  for (int trial = 0; trial < 40; ++trial) {
    const Mesh m = testing::randomly_refined(2 + trial % 3, SquareSplit::crisscross, 1 + trial % 2, 0.3, rng);
    const DofMap dofs = make_dof_map(m);
    const auto L = assemble_laplacian(m);
    std::vector<double> zeta(m.num_elements());
    switch (trial % 4) {
    case 0: // uniform background with a few spikes
      for (auto& z : zeta)
        z = 0.01;
      for (int s = 0; s < 3; ++s)
        zeta[rng() % zeta.size()] = 100.0;
      break;
    case 1: // a band of large jumps across the square, as in a layer
      for (int t = 0; t < static_cast<int>(m.num_elements()); ++t) {
        const auto& tri = m.element(t);
        const double x = (m.vertex(tri[0]).x + m.vertex(tri[1]).x + m.vertex(tri[2]).x) / 3;
        zeta[t] = std::abs(x - 0.5) < 0.15 ? 50.0 * U(rng) + 5.0 : 0.1 * U(rng);
      }
      break;
    case 2: // log-uniform over many decades
      for (auto& z : zeta)
        z = std::exp(16 * U(rng) - 8);
      break;
    default: // small values, threshold below one
      for (auto& z : zeta)
        z = 0.5 * U(rng) * U(rng);
    }
    auto sorted = zeta;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t k = sorted.size();
    const double median = k % 2 ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
    double psi = std::sqrt(median);
    if (psi > 1.0)
      psi = std::sqrt(psi);
    const auto active = regularizer_activation(m, dofs, zeta);
    std::vector<char> expected(dofs.size(), 0);
    for (int t = 0; t < static_cast<int>(m.num_elements()); ++t)
      if (zeta[t] > psi)
        for (int v : m.element(t))
          if (dofs.vertex_to_dof[v] >= 0)
            expected[dofs.vertex_to_dof[v]] = 1;
    if (active != expected)
      ++mismatches;
    const Eigen::MatrixXd R = dense(masked_laplacian(L, active));
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(R).eigenvalues().minCoeff());
  }
  report(10, mismatches == 0 && min_eig >= -1e-10, "regularizer activation and positive semidefiniteness",
         "40 patterns, " + std::to_string(mismatches) + " activation mismatches, min eigenvalue " +
             fmt("%.2e", min_eig));
}

} // namespace

int main() {
  criteria_from_example_run();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
