#pragma once

// Discrete weak gradient, weak strain, weak divergence and the local
// stiffness of the stabilizer-free weak Galerkin element.
//
// For a local weak function v = {v0, vb} with v0 in [P_k(T)]^2 and vb in
// S_k(e) on every edge, the weak gradient is the matrix polynomial
// G in [P_r1(T)]^{2x2} with
//
//   (G, phi)_T = -(v0, div phi)_T + <vb, phi n>_{dT}   for all phi in [P_r1(T)]^{2x2},
//
// the weak strain is sym(G), and the weak divergence D in P_r2(T) solves
//
//   (D, q)_T = -(v0, grad q)_T + <vb . n, q>_{dT}       for all q in P_r2(T).
//
// Matrix-valued coefficients are stored block-wise over the scaled monomial
// basis of P_r1: G as (11, 12, 21, 22) with G_ab ~ d_b v_a, strain as
// (11, 22, 12).

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "projection.hpp"

namespace wgelast {

struct ElementOperators {
  int element = -1;
  int n_local = 0;
  int dim1 = 0;  // dim P_r1
  int dim2 = 0;  // dim P_r2
  Eigen::MatrixXd M1, M2;
  GramSolver M1_solver, M2_solver;
  Eigen::MatrixXd G;  // 4*dim1 x n_local
  Eigen::MatrixXd E;  // 3*dim1 x n_local
  Eigen::MatrixXd D;  // dim2 x n_local
  Eigen::MatrixXd K_strain;  // (eps_w u, eps_w v)_T
  Eigen::MatrixXd K_div;     // (div_w u, div_w v)_T

  /// A_T = 2 mu K_strain + lambda K_div.
  Eigen::MatrixXd stiffness(double mu, double lambda) const {
    if (!(mu > 0) || !(lambda > 0)) throw std::invalid_argument("local_stiffness: Lame coefficients must be positive");
    return 2.0 * mu * K_strain + lambda * K_div;
  }

  /// sum_ab (A_ab, B_ab)_T for two strain coefficient vectors.
  double strain_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    const int n = dim1;
    return a.segment(0, n).dot(M1 * b.segment(0, n)) + a.segment(n, n).dot(M1 * b.segment(n, n)) +
           2.0 * a.segment(2 * n, n).dot(M1 * b.segment(2 * n, n));
  }
  double gradient_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    double s = 0.0;
    for (int blk = 0; blk < 4; ++blk) s += a.segment(blk * dim1, dim1).dot(M1 * b.segment(blk * dim1, dim1));
    return s;
  }
  double div_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return a.dot(M2 * b); }
};

/// Symmetric part of block-stored gradient coefficients: (11, 22, 12).
inline Eigen::VectorXd symmetric_part(const Eigen::VectorXd& g, int dim1) {
  Eigen::VectorXd e(3 * dim1);
  e << g.segment(0, dim1), g.segment(3 * dim1, dim1), 0.5 * (g.segment(dim1, dim1) + g.segment(2 * dim1, dim1));
  return e;
}

inline ElementOperators build_element_operators(const ElementContext& c) {
  ElementOperators op;
  op.element = c.id;
  op.n_local = c.num_local();
  op.dim1 = c.pr1.dimension();
  op.dim2 = c.pr2.dimension();
  const int nk = c.pk.dimension();
  const int d1 = op.dim1, d2 = op.dim2;

  op.M1 = mass_matrix(c.pr1, c.quad);
  op.M2 = c.r2 == c.r1 ? op.M1 : mass_matrix(c.pr2, c.quad);
  op.M1_solver = GramSolver(op.M1);
  op.M2_solver = c.r2 == c.r1 ? op.M1_solver : GramSolver(op.M2);

  // Interior parts: B1[b](j, i) = (d_b m_j, p_i)_T for m in P_r1, p in P_k.
  Eigen::MatrixXd B1[2] = {Eigen::MatrixXd::Zero(d1, nk), Eigen::MatrixXd::Zero(d1, nk)};
  Eigen::MatrixXd B2[2] = {Eigen::MatrixXd::Zero(d2, nk), Eigen::MatrixXd::Zero(d2, nk)};
  for (std::size_t q = 0; q < c.quad.size(); ++q) {
    const Point2 p = c.quad.points[q];
    const double w = c.quad.weights[q];
    const Eigen::VectorXd pk = c.pk.values(p);
    const auto g1 = c.pr1.gradients(p);
    const auto g2 = c.pr2.gradients(p);
    for (int b = 0; b < 2; ++b) {
      B1[b].noalias() += w * g1.row(b).transpose() * pk.transpose();
      B2[b].noalias() += w * g2.row(b).transpose() * pk.transpose();
    }
  }

  Eigen::MatrixXd RG = Eigen::MatrixXd::Zero(4 * d1, op.n_local);
  Eigen::MatrixXd RD = Eigen::MatrixXd::Zero(d2, op.n_local);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) RG.block((2 * a + b) * d1, a * nk, d1, nk) = -B1[b];
    RD.block(0, a * nk, d2, nk) = -B2[a];
  }
  for (const auto& le : c.edges) {
    const int nb = le.basis->dimension();
    const double n[2] = {le.normal.x, le.normal.y};
    for (std::size_t q = 0; q < le.rule->size(); ++q) {
      const Point2 p = le.rule->points[q];
      const double w = le.rule->weights[q];
      const Eigen::VectorXd m1 = c.pr1.values(p);
      const Eigen::VectorXd m2 = c.pr2.values(p);
      const auto psi = le.basis->values(p);  // 2 x nb
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          RG.block((2 * a + b) * d1, le.dof_offset, d1, nb).noalias() += (w * n[b]) * m1 * psi.row(a);
      const Eigen::RowVectorXd psin = n[0] * psi.row(0) + n[1] * psi.row(1);
      RD.block(0, le.dof_offset, d2, nb).noalias() += w * m2 * psin;
    }
  }

  op.G.resize(4 * d1, op.n_local);
  for (int blk = 0; blk < 4; ++blk) op.G.middleRows(blk * d1, d1) = op.M1_solver.solve(RG.middleRows(blk * d1, d1));
  op.D = op.M2_solver.solve(RD);
  op.E.resize(3 * d1, op.n_local);
  op.E.middleRows(0, d1) = op.G.middleRows(0, d1);
  op.E.middleRows(d1, d1) = op.G.middleRows(3 * d1, d1);
  op.E.middleRows(2 * d1, d1) = 0.5 * (op.G.middleRows(d1, d1) + op.G.middleRows(2 * d1, d1));

  const auto E11 = op.E.middleRows(0, d1), E22 = op.E.middleRows(d1, d1), E12 = op.E.middleRows(2 * d1, d1);
  Eigen::MatrixXd ks = E11.transpose() * op.M1 * E11 + E22.transpose() * op.M1 * E22 + 2.0 * E12.transpose() * op.M1 * E12;
  Eigen::MatrixXd kd = op.D.transpose() * op.M2 * op.D;
  op.K_strain = 0.5 * (ks + ks.transpose());
  op.K_div = 0.5 * (kd + kd.transpose());
  return op;
}

inline Eigen::VectorXd weak_gradient(const ElementOperators& op, const Eigen::VectorXd& dofs) { return op.G * dofs; }
inline Eigen::VectorXd weak_strain(const ElementOperators& op, const Eigen::VectorXd& dofs) { return op.E * dofs; }
inline Eigen::VectorXd weak_divergence(const ElementOperators& op, const Eigen::VectorXd& dofs) { return op.D * dofs; }
inline Eigen::MatrixXd local_stiffness(const ElementOperators& op, double mu, double lambda) { return op.stiffness(mu, lambda); }

/// Weak gradient of a function w applied as {w, w|dT}.
inline Eigen::VectorXd weak_gradient_of(const ElementContext& c, const ElementOperators& op, const VectorField& w) {
  const int d1 = op.dim1;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(4 * d1);
  for (std::size_t q = 0; q < c.quad.size(); ++q) {
    const Point2 p = c.quad.points[q];
    const Vec2 v = w(p);
    const auto g = c.pr1.gradients(p);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) rhs.segment((2 * a + b) * d1, d1) -= c.quad.weights[q] * v[a] * g.row(b).transpose();
  }
  for (const auto& le : c.edges) {
    const double n[2] = {le.normal.x, le.normal.y};
    for (std::size_t q = 0; q < le.rule->size(); ++q) {
      const Point2 p = le.rule->points[q];
      const Vec2 v = w(p);
      const Eigen::VectorXd m = c.pr1.values(p);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) rhs.segment((2 * a + b) * d1, d1) += le.rule->weights[q] * v[a] * n[b] * m;
    }
  }
  Eigen::VectorXd g(4 * d1);
  for (int blk = 0; blk < 4; ++blk) g.segment(blk * d1, d1) = op.M1_solver.solve(rhs.segment(blk * d1, d1));
  return g;
}

inline Eigen::VectorXd weak_strain_of(const ElementContext& c, const ElementOperators& op, const VectorField& w) {
  return symmetric_part(weak_gradient_of(c, op, w), op.dim1);
}

inline Eigen::VectorXd weak_divergence_of(const ElementContext& c, const ElementOperators& op, const VectorField& w) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(op.dim2);
  for (std::size_t q = 0; q < c.quad.size(); ++q) {
    const Point2 p = c.quad.points[q];
    const Vec2 v = w(p);
    const auto g = c.pr2.gradients(p);
    rhs -= c.quad.weights[q] * (v[0] * g.row(0) + v[1] * g.row(1)).transpose();
  }
  for (const auto& le : c.edges) {
    for (std::size_t q = 0; q < le.rule->size(); ++q) {
      const Point2 p = le.rule->points[q];
      const Vec2 v = w(p);
      rhs += le.rule->weights[q] * (v[0] * le.normal.x + v[1] * le.normal.y) * c.pr2.values(p);
    }
  }
  return op.M2_solver.solve(rhs);
}

/// Weak strain obtained by testing directly against symmetric matrices,
/// without going through the weak gradient.
inline Eigen::VectorXd weak_strain_direct(const ElementContext& c, const Eigen::VectorXd& dofs) {
  const int d1 = c.pr1.dimension();
  const Eigen::MatrixXd M = mass_matrix(c.pr1, c.quad);
  // Test matrices S m_j with S in {E11, E22, (E12 + E21)/2}; (eps, S m_j) is
  // then (eps11, m_j), (eps22, m_j), (eps12, m_j) respectively.
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * d1);
  for (std::size_t q = 0; q < c.quad.size(); ++q) {
    const Point2 p = c.quad.points[q];
    const Vec2 v = c.interior_value(dofs, p);
    const auto g = c.pr1.gradients(p);
    const double w = c.quad.weights[q];
    // div(S m) for each S: E11 -> (dx m, 0); E22 -> (0, dy m); sym12 -> (dy m, dx m)/2
    rhs.segment(0, d1) -= w * v[0] * g.row(0).transpose();
    rhs.segment(d1, d1) -= w * v[1] * g.row(1).transpose();
    rhs.segment(2 * d1, d1) -= 0.5 * w * (v[0] * g.row(1) + v[1] * g.row(0)).transpose();
  }
  for (const auto& le : c.edges) {
    const Eigen::VectorXd vb = dofs.segment(le.dof_offset, le.basis->dimension());
    const double nx = le.normal.x, ny = le.normal.y;
    for (std::size_t q = 0; q < le.rule->size(); ++q) {
      const Point2 p = le.rule->points[q];
      const Vec2 u = le.basis->values(p) * vb;
      const Eigen::VectorXd m = c.pr1.values(p);
      const double w = le.rule->weights[q];
      // (S n) for each S: E11 -> (nx, 0); E22 -> (0, ny); sym12 -> (ny, nx)/2
      rhs.segment(0, d1) += w * u[0] * nx * m;
      rhs.segment(d1, d1) += w * u[1] * ny * m;
      rhs.segment(2 * d1, d1) += 0.5 * w * (u[0] * ny + u[1] * nx) * m;
    }
  }
  const GramSolver solver(M);
  Eigen::VectorXd e(3 * d1);
  for (int blk = 0; blk < 3; ++blk) e.segment(blk * d1, d1) = solver.solve(rhs.segment(blk * d1, d1));
  return e;
}

/// Local DOF vector of a function w applied as {Q_0 w, Q_b w}.
inline Eigen::VectorXd local_interpolant(const ElementContext& c, const VectorField& w) {
  Eigen::VectorXd v(c.num_local());
  v.segment(0, c.interior_dofs()) = project_interior(c, w);
  for (const auto& le : c.edges) v.segment(le.dof_offset, le.basis->dimension()) = project_edge(*le.basis, *le.rule, w);
  return v;
}

/// Element and edge bubble functions built from the edge line functions
/// l_i(x) = (x - A_i) . n_i / h_T, n_i the inward unit normal of e_i.
class BubbleFunction {
 public:
  BubbleFunction(std::vector<Point2> polygon, Point2 barycenter, double h, bool convex_variant = false)
      : poly_(std::move(polygon)), h_(h), convex_(convex_variant) {
    const std::size_t n = poly_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = poly_[i], b = poly_[(i + 1) % n];
      const double len = norm(b - a);
      normals_.push_back({-(b.y - a.y) / len, (b.x - a.x) / len});  // inward for a CCW loop
    }
    const double raw = product(barycenter, -1);
    if (std::abs(raw) < 1e-14) throw std::runtime_error("evaluate_bubbles: bubble vanishes at the barycenter");
    scale_ = 1.0 / raw;
  }

  std::size_t num_edges() const { return poly_.size(); }
  double line(std::size_t i, Point2 p) const { return dot(p - poly_[i], normals_[i]) / h_; }

  /// Phi_B, normalised to 1 at the barycenter.
  double element(Point2 p) const { return scale_ * product(p, -1); }
  /// phi_{e_i}: product over all edges except e_i.
  double edge(std::size_t i, Point2 p) const { return product(p, static_cast<int>(i)); }

 private:
  double product(Point2 p, int skip) const {
    double v = 1.0;
    for (std::size_t i = 0; i < poly_.size(); ++i) {
      if (static_cast<int>(i) == skip) continue;
      const double l = line(i, p);
      v *= convex_ ? l : l * l;
    }
    return v;
  }

  std::vector<Point2> poly_;
  std::vector<Point2> normals_;
  double h_ = 1.0;
  double scale_ = 1.0;
  bool convex_ = false;
};

inline BubbleFunction evaluate_bubbles(const ElementContext& c, bool convex_variant = false) {
  return BubbleFunction(c.polygon, c.centroid, c.h, convex_variant);
}

}  // namespace wgelast
