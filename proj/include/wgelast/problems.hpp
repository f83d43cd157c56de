#pragma once

// Manufactured elasticity interface problems on the unit square.
//
// Exact solutions are bivariate polynomials with exact rational
// coefficients; strains, stresses and body forces are obtained by exact
// symbolic differentiation, so every quantity handed to the discretisation
// is a polynomial that the quadrature integrates exactly.

#include <boost/rational.hpp>

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mesh.hpp"
#include "projection.hpp"

namespace wgelast {

using Rational = boost::rational<long long>;

/// Polynomial in (x, y) with rational coefficients.
class Poly2 {
 public:
  Poly2() = default;
  Poly2(Rational c) {  // NOLINT(google-explicit-constructor)
    if (c.numerator() != 0) terms_[{0, 0}] = c;
  }
  Poly2(long long c) : Poly2(Rational(c)) {}  // NOLINT(google-explicit-constructor)

  static Poly2 x() { return monomial(1, 0); }
  static Poly2 y() { return monomial(0, 1); }
  static Poly2 monomial(int i, int j, Rational c = 1) {
    Poly2 p;
    if (c.numerator() != 0) p.terms_[{i, j}] = c;
    return p;
  }

  const std::map<std::pair<int, int>, Rational>& terms() const { return terms_; }

  int degree() const {
    int d = -1;
    for (const auto& [ij, c] : terms_) d = std::max(d, ij.first + ij.second);
    return d;
  }
  bool is_zero() const { return terms_.empty(); }

  double operator()(double x, double y) const {
    double s = 0.0;
    for (const auto& [ij, c] : terms_)
      s += boost::rational_cast<double>(c) * std::pow(x, ij.first) * std::pow(y, ij.second);
    return s;
  }
  double operator()(Point2 p) const { return (*this)(p.x, p.y); }

  Poly2 dx() const {
    Poly2 r;
    for (const auto& [ij, c] : terms_)
      if (ij.first > 0) r.add({ij.first - 1, ij.second}, c * ij.first);
    return r;
  }
  Poly2 dy() const {
    Poly2 r;
    for (const auto& [ij, c] : terms_)
      if (ij.second > 0) r.add({ij.first, ij.second - 1}, c * ij.second);
    return r;
  }

  friend Poly2 operator+(Poly2 a, const Poly2& b) {
    for (const auto& [ij, c] : b.terms_) a.add(ij, c);
    return a;
  }
  friend Poly2 operator-(Poly2 a, const Poly2& b) {
    for (const auto& [ij, c] : b.terms_) a.add(ij, -c);
    return a;
  }
  friend Poly2 operator-(const Poly2& a) { return Poly2() - a; }
  friend Poly2 operator*(const Poly2& a, const Poly2& b) {
    Poly2 r;
    for (const auto& [i1, c1] : a.terms_)
      for (const auto& [i2, c2] : b.terms_) r.add({i1.first + i2.first, i1.second + i2.second}, c1 * c2);
    return r;
  }
  friend bool operator==(const Poly2&, const Poly2&) = default;

  std::string str() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [ij, c] : terms_) {
      os << (first ? "" : " + ") << c << "*x^" << ij.first << "*y^" << ij.second;
      first = false;
    }
    return first ? "0" : os.str();
  }

 private:
  void add(std::pair<int, int> ij, Rational c) {
    auto& v = terms_[ij];
    v += c;
    if (v.numerator() == 0) terms_.erase(ij);
  }

  std::map<std::pair<int, int>, Rational> terms_;
};

using PolyVec = std::array<Poly2, 2>;

/// Exact displacement on one subdomain with all derived quantities.
struct SubdomainSolution {
  PolyVec u;
  std::array<std::array<Poly2, 2>, 2> grad;    // grad[a][b] = d_b u_a
  std::array<std::array<Poly2, 2>, 2> strain;  // symmetric
  Poly2 div;
  std::array<std::array<Poly2, 2>, 2> stress;  // 2 mu eps + lambda div I
  PolyVec force;                               // -div stress

  SubdomainSolution() = default;
  SubdomainSolution(PolyVec disp, Rational mu, Rational lambda) : u(std::move(disp)) {
    for (int a = 0; a < 2; ++a) {
      grad[a][0] = u[a].dx();
      grad[a][1] = u[a].dy();
    }
    div = grad[0][0] + grad[1][1];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        strain[a][b] = Rational(1, 2) * (grad[a][b] + grad[b][a]);
        stress[a][b] = Rational(2) * mu * strain[a][b] + (a == b ? lambda * div : Poly2());
      }
    for (int a = 0; a < 2; ++a) force[a] = -(stress[a][0].dx() + stress[a][1].dy());
  }

  int degree() const { return std::max(u[0].degree(), u[1].degree()); }
  Vec2 value(Point2 p) const { return {u[0](p), u[1](p)}; }
  Eigen::Matrix2d gradient(Point2 p) const {
    Eigen::Matrix2d g;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) g(a, b) = grad[a][b](p);
    return g;
  }
  Eigen::Matrix2d stress_at(Point2 p) const {
    Eigen::Matrix2d s;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) s(a, b) = stress[a][b](p);
    return s;
  }
};

/// Lame coefficients, constant per subdomain (index = subdomain label).
struct PiecewiseCoefficient {
  std::array<double, 2> mu{0.5, 0.5};
  std::array<double, 2> lambda{1.0, 1.0};

  PiecewiseCoefficient() = default;
  PiecewiseCoefficient(std::array<double, 2> m, std::array<double, 2> l) : mu(m), lambda(l) {
    for (int i = 0; i < 2; ++i)
      if (!(mu[i] > 0) || !(lambda[i] > 0) || !std::isfinite(lambda[i] / mu[i]))
        throw std::invalid_argument("PiecewiseCoefficient: mu and lambda must be positive with finite ratio");
  }
};

struct JumpData {
  Vec2 displacement;  // u_0 - u_1
  Vec2 traction;      // sigma(u_0) n_0 + sigma(u_1) n_1
};

struct ManufacturedProblem {
  int id = 0;
  Layout layout = Layout::Vertical;
  PiecewiseCoefficient coeff;
  // Exact rational Lame values (used for the symbolic data).
  std::array<Rational, 2> mu_exact{Rational(1, 2), Rational(1, 2)};
  std::array<Rational, 2> lambda_exact{1, 1};
  std::optional<std::array<SubdomainSolution, 2>> exact;  // index = subdomain label
  Vec2 constant_force{0.0, 0.0};                           // used when no exact solution

  bool has_exact() const { return exact.has_value(); }
  int data_degree() const {
    if (!exact) return 0;
    return std::max((*exact)[0].degree(), (*exact)[1].degree());
  }

  Vec2 displacement(Point2 p, int subdomain) const {
    if (!exact) throw std::logic_error("problem has no exact solution");
    return (*exact)[subdomain].value(p);
  }

  /// Dirichlet data g on the outer boundary, from the trace of subdomain `subdomain`.
  Vec2 boundary(Point2 p, int subdomain) const { return exact ? (*exact)[subdomain].value(p) : Vec2::Zero(); }
};

/// f = -div sigma(u) evaluated with the branch of the named subdomain.
inline Vec2 body_force(const ManufacturedProblem& pb, Point2 p, int subdomain) {
  if (!pb.exact) return pb.constant_force;
  const auto& s = (*pb.exact)[subdomain];
  return {s.force[0](p), s.force[1](p)};
}

/// Jump data at a point of the interface, given the unit normal pointing out
/// of the inclusion (subdomain 0).
inline JumpData jump_data(const ManufacturedProblem& pb, Point2 p, Point2 normal_out_of_inclusion) {
  if (!on_interface(p, pb.layout)) throw std::invalid_argument("jump_data: point is not on the interface");
  if (!pb.exact) return {Vec2::Zero(), Vec2::Zero()};
  const auto& s0 = (*pb.exact)[0];
  const auto& s1 = (*pb.exact)[1];
  const Vec2 n(normal_out_of_inclusion.x, normal_out_of_inclusion.y);
  return {s0.value(p) - s1.value(p), s0.stress_at(p) * n - s1.stress_at(p) * n};
}

/// Jump data at an interface point; the normal is inferred from the
/// interface geometry (rejects the corners of the square inclusion).
inline JumpData jump_data(const ManufacturedProblem& pb, int interface_id, Point2 p) {
  if (interface_id != 0) throw std::invalid_argument("jump_data: only interface 0 exists");
  if (!on_interface(p, pb.layout)) throw std::invalid_argument("jump_data: point is not on the interface");
  Point2 n{1.0, 0.0};
  if (pb.layout == Layout::Vertical) {
    n = {-1.0, 0.0};  // the inclusion is the right half
  } else {
    constexpr double tol = 1e-10;
    const bool l = std::abs(p.x - 0.25) <= tol, r = std::abs(p.x - 0.75) <= tol;
    const bool b = std::abs(p.y - 0.25) <= tol, t = std::abs(p.y - 0.75) <= tol;
    if ((l || r) && (b || t)) throw std::invalid_argument("jump_data: normal undefined at an inclusion corner");
    n = l ? Point2{-1, 0} : r ? Point2{1, 0} : b ? Point2{0, -1} : Point2{0, 1};
  }
  return jump_data(pb, p, n);
}

namespace detail {

inline Poly2 lin(Rational a, Rational bx, Rational by) { return Poly2(a) + bx * Poly2::x() + by * Poly2::y(); }

inline ManufacturedProblem make_problem(int id, Layout layout, Rational outer, Rational inner) {
  // 2 mu = lambda = value in each subdomain
  ManufacturedProblem pb;
  pb.id = id;
  pb.layout = layout;
  pb.mu_exact = {inner / 2, outer / 2};
  pb.lambda_exact = {inner, outer};
  pb.coeff = PiecewiseCoefficient({boost::rational_cast<double>(inner / 2), boost::rational_cast<double>(outer / 2)},
                                  {boost::rational_cast<double>(inner), boost::rational_cast<double>(outer)});
  return pb;
}

inline void attach(ManufacturedProblem& pb, PolyVec inclusion, PolyVec outer) {
  pb.exact = std::array<SubdomainSolution, 2>{SubdomainSolution(std::move(inclusion), pb.mu_exact[0], pb.lambda_exact[0]),
                                              SubdomainSolution(std::move(outer), pb.mu_exact[1], pb.lambda_exact[1])};
}

}  // namespace detail

/// Problem `id` in 1..6.
///
///  1: vertical interface, contrast 10, f = (1, -1), homogeneous data, no exact solution.
///  2: vertical interface, no contrast, smooth piecewise polynomial solution.
///  3: vertical interface, contrast 10.
///  4-6: square inclusion, contrasts 1, 1/10, 100, solutions built on
///       B4 = (x-1/4)(x-3/4)(y-1/4)(y-3/4).
inline ManufacturedProblem example(int id) {
  using detail::lin;
  const Poly2 x = Poly2::x(), y = Poly2::y();
  const Poly2 one(1);
  switch (id) {
    case 1: {
      auto pb = detail::make_problem(1, Layout::Vertical, 1, 10);
      pb.constant_force = {1.0, -1.0};
      return pb;
    }
    case 2: {
      auto pb = detail::make_problem(2, Layout::Vertical, 1, 1);
      const Poly2 outer_pre = Rational(2) * x * x * (one - x) * y;
      const PolyVec outer{outer_pre * (Rational(4) * x * y - Rational(16) * y * y - Rational(3) * x + Rational(8) * y + one),
                          outer_pre * (Rational(4) * x * y - Rational(8) * y * y - Rational(3) * x + Rational(4) * y + one)};
      const Poly2 inner_pre = Rational(-2) * x * x * (one - x) * (one - y);
      const PolyVec inner{inner_pre * (Rational(8) * y * y - Rational(4) * y + x - one), inner_pre * (x - one)};
      detail::attach(pb, inner, outer);
      return pb;
    }
    case 3: {
      auto pb = detail::make_problem(3, Layout::Vertical, 1, 10);
      const Poly2 pre = Rational(2) * x * (one - x) * y;
      const Poly2 u1 = Rational(22) * x * x * y - Rational(196) * x * y * y + Rational(72) * y * y * y -
                       Rational(12) * x * x + Rational(98) * x * y - Rational(36) * y * y + x;
      const Poly2 u2 = Rational(22) * x * x * y - Rational(80) * x * y * y + Rational(36) * y * y * y -
                       Rational(12) * x * x + Rational(40) * x * y - Rational(18) * y * y + x;
      const Poly2 inner_pre = Rational(-2) * x * x * (one - x) * (one - y);
      const PolyVec inner{inner_pre * (Rational(8) * y * y - Rational(4) * y + x - one), inner_pre * (x - one)};
      detail::attach(pb, inner, {pre * u1, pre * u2});
      return pb;
    }
    case 4:
    case 5:
    case 6: {
      const Rational contrast = id == 4 ? Rational(1) : id == 5 ? Rational(1, 10) : Rational(100);
      const Rational outer_scale = id == 4 ? Rational(256, 33) : id == 5 ? Rational(2048, 165) : Rational(1024 * 25, 33);
      auto pb = detail::make_problem(id, Layout::Square, 1, contrast);
      const Poly2 b4 = lin(Rational(-1, 4), 1, 0) * lin(Rational(-3, 4), 1, 0) * lin(Rational(-1, 4), 0, 1) *
                       lin(Rational(-3, 4), 0, 1);
      const Poly2 outer = outer_scale * x * (one - x) * y * (one - y) * b4;
      const Poly2 inner = Rational(4096, 11) * (x * x + y * y - x - y + Poly2(Rational(3, 16))) * b4;
      detail::attach(pb, {-inner, Rational(4) * inner}, {outer, Rational(-4) * outer});
      return pb;
    }
    default: throw std::invalid_argument("example: id must be in 1..6");
  }
}

}  // namespace wgelast
