#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "wg/error.hpp"

namespace wg {

inline constexpr int kMaxQuadratureDegree = 6;

/// Points in barycentric coordinates on the reference triangle; weights sum
/// to the reference area 1/2.
struct TriangleQuadrature {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Points are arc parameters t in [0,1]; weights sum to 1.
struct EdgeQuadrature {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

namespace detail {

// n-point Gauss-Legendre rule mapped to [0,1].
inline void gauss_legendre_unit(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

inline void check_degree(int degree) {
  if (degree < 0 || degree > kMaxQuadratureDegree)
    throw UnsupportedDegreeError("no quadrature rule of degree " + std::to_string(degree));
}

}  // namespace detail

inline EdgeQuadrature edge_quadrature(int degree) {
  detail::check_degree(degree);
  EdgeQuadrature q;
  q.degree = degree;
  detail::gauss_legendre_unit(degree / 2 + 1, q.points, q.weights);
  return q;
}

/// Centroid rule for degree <= 1, the symmetric 3-point rule for degree 2,
/// and a collapsed (conical) Gauss product rule above that.
inline TriangleQuadrature triangle_quadrature(int degree) {
  detail::check_degree(degree);
  TriangleQuadrature q;
  q.degree = degree;
  if (degree <= 1) {
    q.points = {{1.0 / 3, 1.0 / 3, 1.0 / 3}};
    q.weights = {0.5};
    return q;
  }
  if (degree == 2) {
    q.points = {{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}};
    q.weights = {1.0 / 6, 1.0 / 6, 1.0 / 6};
    return q;
  }
  const int n = (degree + 3) / 2;
  std::vector<double> x, w;
  detail::gauss_legendre_unit(n, x, w);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = x[i];
      const double v = x[j] * (1.0 - u);
      q.points.push_back({1.0 - u - v, u, v});
      q.weights.push_back(w[i] * w[j] * (1.0 - u));
    }
  }
  return q;
}

}  // namespace wg
