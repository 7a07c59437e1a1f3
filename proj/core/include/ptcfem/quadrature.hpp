#ifndef PTCFEM_QUADRATURE_HPP
#define PTCFEM_QUADRATURE_HPP

#include <array>
#include <cstddef>
#include <span>

namespace ptcfem {

/// Quadrature on the reference triangle in barycentric coordinates. Weights
/// are normalized to sum to one, so an integral over T is |T| times the
/// weighted sum.
struct TriangleRule {
  std::span<const std::array<double, 3>> points;
  std::span<const double> weights;
  int order;
};

/// Quadrature on [0,1]; weights sum to one.
struct LineRule {
  std::span<const double> points;
  std::span<const double> weights;
  int order;
};

namespace detail {

// Symmetric six-point rule exact for degree 4 (Dunavant).
inline constexpr double kA1 = 0.445948490915964886318329253883;
inline constexpr double kB1 = 1.0 - 2.0 * kA1;
inline constexpr double kA2 = 0.091576213509770743459571463402;
inline constexpr double kB2 = 1.0 - 2.0 * kA2;
inline constexpr double kW1 = 0.223381589678011465944827816655;
inline constexpr double kW2 = 0.109951743655321867388505516678;

inline constexpr std::array<std::array<double, 3>, 6> kTri6Points{{
    {kB1, kA1, kA1},
    {kA1, kB1, kA1},
    {kA1, kA1, kB1},
    {kB2, kA2, kA2},
    {kA2, kB2, kA2},
    {kA2, kA2, kB2},
}};
inline constexpr std::array<double, 6> kTri6Weights{kW1, kW1, kW1, kW2, kW2, kW2};

inline constexpr std::array<std::array<double, 3>, 1> kTri1Points{{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}}};
inline constexpr std::array<double, 1> kTri1Weights{1.0};

// Three-point Gauss-Legendre on [0,1].
inline constexpr double kG = 0.387298334620741688517926539978; // sqrt(3/5) / 2
inline constexpr std::array<double, 3> kGauss3Points{0.5 - kG, 0.5, 0.5 + kG};
inline constexpr std::array<double, 3> kGauss3Weights{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

} // namespace detail

/// Degree-4 rule used for every volume term.
inline constexpr TriangleRule triangle_rule_order4() {
  return {detail::kTri6Points, detail::kTri6Weights, 4};
}

inline constexpr TriangleRule triangle_rule_centroid() {
  return {detail::kTri1Points, detail::kTri1Weights, 1};
}

/// Degree-5 Gauss rule used on edges.
inline constexpr LineRule gauss3() { return {detail::kGauss3Points, detail::kGauss3Weights, 5}; }

} // namespace ptcfem

#endif // PTCFEM_QUADRATURE_HPP
