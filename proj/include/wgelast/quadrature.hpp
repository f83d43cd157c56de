#pragma once

// Quadrature on polygons (ear clipping + collapsed Gauss rules on each
// triangle) and on straight edges (Gauss-Legendre).

#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mesh.hpp"

namespace wgelast {

struct QuadRule {
  std::vector<Point2> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre rule with n points on [0, 1], nodes ascending.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre01(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre01: n must be >= 1");
  const auto zeros = boost::math::legendre_p_zeros<double>(n);  // non-negative zeros, ascending
  std::vector<double> x, w;
  x.reserve(n);
  w.reserve(n);
  auto push = [&](double z) {
    const double dp = boost::math::legendre_p_prime(n, z);
    x.push_back(0.5 * (z + 1.0));
    w.push_back(1.0 / ((1.0 - z * z) * dp * dp));  // 2/((1-z^2)P'^2), halved for [0,1]
  };
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it)
    if (*it != 0.0) push(-*it);
  for (double z : zeros) push(z);
  return {x, w};
}

/// Collapsed (Duffy) product rule on triangle (a, b, c), exact to `exactness`.
/// The Jacobian factor (1 - u) raises the degree in u by one.
inline void append_triangle_rule(Point2 a, Point2 b, Point2 c, int exactness, QuadRule& rule) {
  const int n = (exactness + 3) / 2;
  const auto [x, w] = gauss_legendre01(n);
  const double area2 = std::abs(cross(b - a, c - a));
  for (int i = 0; i < n; ++i) {
    const double u = x[i];
    for (int j = 0; j < n; ++j) {
      const double v = x[j] * (1.0 - u);
      rule.points.push_back(a + u * (b - a) + v * (c - a));
      rule.weights.push_back(area2 * w[i] * w[j] * (1.0 - u));
    }
  }
}

/// Rule on a simple polygon, exact for polynomials of total degree <= exactness.
inline QuadRule build_quadrature(std::span<const Point2> polygon, int exactness) {
  if (exactness < 0) throw std::invalid_argument("build_quadrature: exactness must be >= 0");
  QuadRule rule;
  rule.exactness_degree = exactness;
  for (const auto& t : triangulate(polygon)) append_triangle_rule(polygon[t[0]], polygon[t[1]], polygon[t[2]], exactness, rule);
  return rule;
}

/// Gauss rule on segment [a, b]; weights include the segment length.
inline QuadRule build_edge_quadrature(Point2 a, Point2 b, int exactness) {
  if (exactness < 0) throw std::invalid_argument("build_edge_quadrature: exactness must be >= 0");
  QuadRule rule;
  rule.exactness_degree = exactness;
  const auto [x, w] = gauss_legendre01(exactness / 2 + 1);
  const double len = norm(b - a);
  for (std::size_t i = 0; i < x.size(); ++i) {
    rule.points.push_back(a + x[i] * (b - a));
    rule.weights.push_back(w[i] * len);
  }
  return rule;
}

template <class F>
double integrate(const QuadRule& rule, F&& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * f(rule.points[i]);
  return s;
}

}  // namespace wgelast
