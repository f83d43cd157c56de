#pragma once

// Scaled monomial bases on elements and the S_k(e) trace spaces on edges.

#include <Eigen/Dense>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "mesh.hpp"

namespace wgelast {

inline constexpr int poly_dim(int degree) { return degree < 0 ? 0 : (degree + 1) * (degree + 2) / 2; }

/// {((x-xc)/h)^a ((y-yc)/h)^b : a+b <= r} in graded lexicographic order
/// (degree 0; then x, y; then x^2, xy, y^2; ...), optionally orthonormalized.
class ScaledMonomialBasis {
 public:
  ScaledMonomialBasis() = default;
  ScaledMonomialBasis(Point2 center, double scale, int degree) : center_(center), scale_(scale), degree_(degree) {
    if (degree < 0) throw std::invalid_argument("ScaledMonomialBasis: negative degree");
    if (!(scale > 0)) throw std::invalid_argument("ScaledMonomialBasis: scale must be positive");
    for (int d = 0; d <= degree; ++d)
      for (int b = 0; b <= d; ++b) powers_.push_back({d - b, b});
  }

  int degree() const { return degree_; }
  int dimension() const { return static_cast<int>(powers_.size()); }
  Point2 center() const { return center_; }
  double scale() const { return scale_; }
  const std::vector<std::array<int, 2>>& powers() const { return powers_; }

  bool orthonormal() const { return transform_.size() > 0; }

  /// Replace the monomials by an L2(rule)-orthonormal basis of the same
  /// space. The change of basis is lower triangular, so the first poly_dim(j)
  /// functions still span P_j. On flat elements the raw Gram matrix of degree
  /// 5 monomials reaches condition 1e12; here it is the identity up to
  /// rounding, which keeps coefficients accurate.
  void orthonormalize(std::span<const Point2> points, std::span<const double> weights) {
    transform_.resize(0, 0);
    const int n = dimension();
    if (static_cast<int>(points.size()) < n) throw std::invalid_argument("orthonormalize: rule has too few points");
    Eigen::MatrixXd v(points.size(), n);
    for (std::size_t q = 0; q < points.size(); ++q) v.row(q) = std::sqrt(weights[q]) * values(points[q]).transpose();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    // phi = R^{-T} m
    transform_ = r.transpose().triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  }

  Eigen::VectorXd values(Point2 p) const {
    const double sx = (p.x - center_.x) / scale_, sy = (p.y - center_.y) / scale_;
    const auto px = power_table(sx), py = power_table(sy);
    Eigen::VectorXd v(dimension());
    for (int i = 0; i < dimension(); ++i) v[i] = px[powers_[i][0]] * py[powers_[i][1]];
    if (orthonormal()) return transform_.triangularView<Eigen::Lower>() * v;
    return v;
  }

  /// Row 0: d/dx, row 1: d/dy.
  Eigen::Matrix<double, 2, Eigen::Dynamic> gradients(Point2 p) const {
    const double sx = (p.x - center_.x) / scale_, sy = (p.y - center_.y) / scale_;
    const auto px = power_table(sx), py = power_table(sy);
    Eigen::Matrix<double, 2, Eigen::Dynamic> g(2, dimension());
    for (int i = 0; i < dimension(); ++i) {
      const auto [a, b] = powers_[i];
      g(0, i) = a == 0 ? 0.0 : a * px[a - 1] * py[b] / scale_;
      g(1, i) = b == 0 ? 0.0 : b * px[a] * py[b - 1] / scale_;
    }
    if (orthonormal()) return g * transform_.transpose();
    return g;
  }

 private:
  std::vector<double> power_table(double s) const {
    std::vector<double> t(degree_ + 1, 1.0);
    for (int i = 1; i <= degree_; ++i) t[i] = t[i - 1] * s;
    return t;
  }

  Point2 center_;
  double scale_ = 1.0;
  int degree_ = 0;
  std::vector<std::array<int, 2>> powers_;
  Eigen::MatrixXd transform_;  // lower triangular, empty for raw monomials
};

/// Trace space on an edge.
///
/// Full: [P_k(e)]^2, the space the scheme is solved with by default.
/// Reduced: S_k(e) = [P_{k-1}(e)]^2 + RM traces, i.e. [P_{k-1}(e)]^2 for
/// k >= 2 and the three rigid-motion traces for k == 1. With r1 = k + 1 it
/// loses one order of convergence, see README.
enum class EdgeSpace { Full, Reduced };

inline int edge_dimension(int k, EdgeSpace space) {
  if (space == EdgeSpace::Full) return 2 * (k + 1);
  return k == 1 ? 3 : 2 * k;
}

/// Edge trace basis. Polynomial blocks are {L_j(s) e_1} then {L_j(s) e_2}
/// with L_j Legendre in the normalised arc-length coordinate s in [-1, 1].
/// Reduced k == 1: {e_1, e_2, s * t_perp}, the traces of the two
/// translations and of the rotation about the edge midpoint (scaled by 2/|e|).
class EdgeBasis {
 public:
  EdgeBasis() = default;
  EdgeBasis(Point2 a, Point2 b, int k, EdgeSpace space = EdgeSpace::Full) : a_(a), b_(b), k_(k), space_(space) {
    if (k < 1) throw std::invalid_argument("EdgeBasis: k must be >= 1");
    length_ = norm(b - a);
    if (!(length_ > kGeomTol)) throw std::invalid_argument("EdgeBasis: degenerate edge");
    tangent_ = (1.0 / length_) * (b - a);
    mid_ = 0.5 * (a + b);
  }

  int k() const { return k_; }
  EdgeSpace space() const { return space_; }
  int dimension() const { return edge_dimension(k_, space_); }
  double length() const { return length_; }
  Point2 tangent() const { return tangent_; }
  Point2 start() const { return a_; }
  Point2 end() const { return b_; }

  double coordinate(Point2 p) const { return std::clamp(2.0 * dot(p - mid_, tangent_) / length_, -1.0, 1.0); }

  /// 2 x dim matrix of basis values at `p` (assumed to lie on the edge).
  Eigen::Matrix<double, 2, Eigen::Dynamic> values(Point2 p) const {
    const double s = coordinate(p);
    Eigen::Matrix<double, 2, Eigen::Dynamic> v = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, dimension());
    if (space_ == EdgeSpace::Reduced && k_ == 1) {
      v(0, 0) = 1.0;
      v(1, 1) = 1.0;
      v(0, 2) = -s * tangent_.y;
      v(1, 2) = s * tangent_.x;
      return v;
    }
    const int nj = dimension() / 2;
    for (int j = 0; j < nj; ++j) {
      const double l = boost::math::legendre_p(j, s);
      v(0, j) = l;
      v(1, nj + j) = l;
    }
    return v;
  }

 private:
  Point2 a_, b_, tangent_, mid_;
  double length_ = 0.0;
  int k_ = 1;
  EdgeSpace space_ = EdgeSpace::Full;
};

}  // namespace wgelast
