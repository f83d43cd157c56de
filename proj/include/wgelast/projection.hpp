#pragma once

// Element geometry context and the L2 projections Q_0, Q_b, Q_r and Q_h.

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "basis.hpp"
#include "quadrature.hpp"
#include "space.hpp"

namespace wgelast {

using Vec2 = Eigen::Vector2d;
using VectorField = std::function<Vec2(Point2)>;
using ScalarField = std::function<double(Point2)>;
/// Field defined per subdomain label; evaluated with the label of the owning element.
using PiecewiseField = std::function<Vec2(Point2, int)>;

struct LocalEdge {
  int edge = -1;
  Point2 normal;  // outward from the element
  const EdgeBasis* basis = nullptr;
  const QuadRule* rule = nullptr;
  int dof_offset = 0;  // first local DOF of this edge's block
};

/// Everything needed to integrate on one element.
struct ElementContext {
  int id = -1;
  int subdomain = 1;
  std::vector<Point2> polygon;
  Point2 centroid;
  double h = 0.0;
  double area = 0.0;
  int k = 1, r1 = 2, r2 = 2;
  ScaledMonomialBasis pk, pr1, pr2;
  QuadRule quad;
  std::vector<LocalEdge> edges;

  int interior_dofs() const { return 2 * pk.dimension(); }
  int num_local() const {
    int n = interior_dofs();
    for (const auto& e : edges) n += e.basis->dimension();
    return n;
  }

  /// v0 at p for local DOF vector `dofs` (interior block only is read).
  Vec2 interior_value(const Eigen::VectorXd& dofs, Point2 p) const {
    const Eigen::VectorXd phi = pk.values(p);
    const int n = pk.dimension();
    return {phi.dot(dofs.segment(0, n)), phi.dot(dofs.segment(n, n))};
  }
};

inline ElementContext make_element_context(const WgSpace& s, int e) {
  const PolyMesh& m = *s.mesh;
  const Element& el = m.elements[e];
  ElementContext c;
  c.id = e;
  c.subdomain = el.subdomain;
  c.polygon = m.polygon(e);
  c.centroid = el.centroid;
  c.h = el.diameter;
  c.area = el.area;
  c.k = s.k;
  c.r1 = s.r1[e];
  c.r2 = s.r2[e];
  c.pk = ScaledMonomialBasis(c.centroid, c.h, c.k);
  c.pr1 = ScaledMonomialBasis(c.centroid, c.h, c.r1);
  c.pr2 = ScaledMonomialBasis(c.centroid, c.h, c.r2);
  c.quad = build_quadrature(c.polygon, s.quad_degree[e]);
  c.pk.orthonormalize(c.quad.points, c.quad.weights);
  c.pr1.orthonormalize(c.quad.points, c.quad.weights);
  c.pr2.orthonormalize(c.quad.points, c.quad.weights);
  int off = c.interior_dofs();
  for (const auto& ee : m.element_edges[e]) {
    LocalEdge le;
    le.edge = ee.edge;
    le.normal = m.outward_normal(ee);
    le.basis = &s.edge_bases[ee.edge];
    le.rule = &s.edge_rules[ee.edge];
    le.dof_offset = off;
    off += le.basis->dimension();
    c.edges.push_back(le);
  }
  return c;
}

inline Eigen::MatrixXd mass_matrix(const ScaledMonomialBasis& b, const QuadRule& q) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(b.dimension(), b.dimension());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Eigen::VectorXd v = b.values(q.points[i]);
    m.noalias() += q.weights[i] * v * v.transpose();
  }
  return m;
}

inline Eigen::MatrixXd gram_matrix(const EdgeBasis& b, const QuadRule& q) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(b.dimension(), b.dimension());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto v = b.values(q.points[i]);
    m.noalias() += q.weights[i] * v.transpose() * v;
  }
  return m;
}

/// Q_r: L2 projection of a scalar onto the span of `b`.
inline Eigen::VectorXd project_scalar(const ScaledMonomialBasis& b, const QuadRule& q, const ScalarField& f) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b.dimension());
  for (std::size_t i = 0; i < q.size(); ++i) rhs += q.weights[i] * f(q.points[i]) * b.values(q.points[i]);
  return GramSolver(mass_matrix(b, q)).solve(rhs);
}

/// Q_0: projection onto [P_k(T)]^2; result is [x coefficients; y coefficients].
inline Eigen::VectorXd project_interior(const ElementContext& c, const VectorField& w) {
  const int n = c.pk.dimension();
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 2);
  for (std::size_t i = 0; i < c.quad.size(); ++i) {
    const Vec2 v = w(c.quad.points[i]);
    const Eigen::VectorXd phi = c.pk.values(c.quad.points[i]);
    rhs.col(0) += c.quad.weights[i] * v[0] * phi;
    rhs.col(1) += c.quad.weights[i] * v[1] * phi;
  }
  const Eigen::MatrixXd sol = GramSolver(mass_matrix(c.pk, c.quad)).solve(rhs);
  Eigen::VectorXd out(2 * n);
  out << sol.col(0), sol.col(1);
  return out;
}

/// Q_b: projection onto S_k(e).
inline Eigen::VectorXd project_edge(const EdgeBasis& b, const QuadRule& q, const VectorField& w) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b.dimension());
  for (std::size_t i = 0; i < q.size(); ++i) rhs += q.weights[i] * b.values(q.points[i]).transpose() * w(q.points[i]);
  return GramSolver(gram_matrix(b, q)).solve(rhs);
}

/// Q_h w as a full-layout coefficient vector. Interface edges receive the
/// trace from each side in the corresponding block.
inline Eigen::VectorXd project_Qh(const WgSpace& s, const PiecewiseField& w) {
  const PolyMesh& m = *s.mesh;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s.layout.total);
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const ElementContext c = make_element_context(s, static_cast<int>(e));
    const int sd = c.subdomain;
    out.segment(s.layout.element_offset[e], s.layout.interior_block) = project_interior(c, [&](Point2 p) { return w(p, sd); });
  }
  for (std::size_t i = 0; i < m.num_edges(); ++i) {
    const Edge& ed = m.edges[i];
    const int sl = m.elements[ed.left_element].subdomain;
    out.segment(s.layout.edge_offset[i], s.layout.edge_block) =
        project_edge(s.edge_bases[i], s.edge_rules[i], [&](Point2 p) { return w(p, sl); });
    if (ed.tag == EdgeTag::Interface) {
      const int sr = m.elements[*ed.right_element].subdomain;
      out.segment(s.layout.edge_offset_r[i], s.layout.edge_block) =
          project_edge(s.edge_bases[i], s.edge_rules[i], [&](Point2 p) { return w(p, sr); });
    }
  }
  return out;
}

/// Gather the local DOF vector of element `e` from a full-layout vector.
inline Eigen::VectorXd gather(const WgSpace& s, int e, const Eigen::VectorXd& full) {
  const auto g = s.layout.local_to_global(*s.mesh, e);
  Eigen::VectorXd v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = full[g[i]];
  return v;
}

}  // namespace wgelast
