#include <gtest/gtest.h>

#include <wgelast/verify.hpp>
#include <wgelast/wgelast.hpp>

#include <random>

using namespace wgelast;

namespace {

// Dense least-squares oracle: minimise sum_q w_q |f(p_q) - sum_j c_j phi_j(p_q)|^2
// over monomials in physical coordinates, then evaluate.
Eigen::VectorXd lsq_fit_values(const QuadRule& q, int degree, Point2 center, double h, const ScalarField& f,
                               const std::vector<Point2>& at) {
  const ScaledMonomialBasis raw(center, h, degree);
  Eigen::MatrixXd A(q.size(), raw.dimension());
  Eigen::VectorXd b(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    A.row(i) = std::sqrt(q.weights[i]) * raw.values(q.points[i]).transpose();
    b[i] = std::sqrt(q.weights[i]) * f(q.points[i]);
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  Eigen::VectorXd out(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) out[i] = raw.values(at[i]).dot(c);
  return out;
}

struct Fixture {
  PolyMesh mesh = generate(GridFamily::A, 2, Layout::Vertical);
  Discretization d{mesh, 2, DegreePolicy::for_family(GridFamily::A), 4};
};

}  // namespace

TEST(Basis, OrthonormalOnElement) {
  Fixture f;
  for (int e = 0; e < f.d.num_elements(); ++e) {
    const ElementContext& c = f.d.context(e);
    for (const auto* b : {&c.pk, &c.pr1, &c.pr2}) {
      const Eigen::MatrixXd M = mass_matrix(*b, c.quad);
      EXPECT_LT((M - Eigen::MatrixXd::Identity(M.rows(), M.cols())).norm(), 1e-10);
    }
    // graded: the first basis function is constant, the next two are linear
    const Eigen::VectorXd v0 = c.pk.values(c.centroid), v1 = c.pk.values(c.polygon[0]);
    EXPECT_NEAR(v0[0], v1[0], 1e-12);
    const auto g = c.pk.gradients(c.polygon[1]);
    EXPECT_NEAR(g.col(0).norm(), 0.0, 1e-12);
    EXPECT_LT((c.pk.gradients(c.polygon[0]).col(1) - g.col(1)).norm(), 1e-10);
  }
}

TEST(Basis, GradientsMatchFiniteDifferences) {
  Fixture f;
  const ElementContext& c = f.d.context(3);
  const Point2 p = c.centroid + Point2{0.01, -0.02};
  const double eps = 1e-6;
  const auto g = c.pr1.gradients(p);
  const Eigen::VectorXd dx = (c.pr1.values(p + Point2{eps, 0}) - c.pr1.values(p - Point2{eps, 0})) / (2 * eps);
  const Eigen::VectorXd dy = (c.pr1.values(p + Point2{0, eps}) - c.pr1.values(p - Point2{0, eps})) / (2 * eps);
  EXPECT_LT((g.row(0).transpose() - dx).lpNorm<Eigen::Infinity>(), 1e-6 * g.norm());
  EXPECT_LT((g.row(1).transpose() - dy).lpNorm<Eigen::Infinity>(), 1e-6 * g.norm());
}

TEST(Projection, InteriorReproducesPk) {
  Fixture f;
  std::mt19937_64 rng(1);
  for (int e = 0; e < f.d.num_elements(); ++e) {
    const ElementContext& c = f.d.context(e);
    const RandomVectorPoly w(c.k, c.centroid, c.h, rng);
    const Eigen::VectorXd q = project_interior(c, [&w](Point2 p) { return w.value(p); });
    for (const Point2& p : c.polygon) EXPECT_LT((c.interior_value(q, p) - w.value(p)).norm(), 1e-12);
    EXPECT_EQ(project_interior(c, [](Point2) { return Vec2(0, 0); }).norm(), 0.0);
  }
}

TEST(Projection, InteriorIdempotentAndOrthogonal) {
  Fixture f;
  const ElementContext& c = f.d.context(1);
  auto w = [](Point2 p) { return Vec2(std::sin(3 * p.x) * p.y, std::exp(p.x - p.y)); };
  const Eigen::VectorXd q = project_interior(c, w);
  const Eigen::VectorXd qq = project_interior(c, [&](Point2 p) { return c.interior_value(q, p); });
  EXPECT_LT((q - qq).norm(), 1e-13);
  // w - Q_0 w is orthogonal to P_k
  Eigen::VectorXd r = Eigen::VectorXd::Zero(c.pk.dimension());
  for (std::size_t i = 0; i < c.quad.size(); ++i) {
    const Point2 p = c.quad.points[i];
    r += c.quad.weights[i] * (w(p)[0] - c.interior_value(q, p)[0]) * c.pk.values(p);
  }
  EXPECT_LT(r.norm(), 1e-14);
}

TEST(Projection, InteriorMatchesDenseOracle) {
  Fixture f;
  for (int e : {0, 1}) {
    const ElementContext& c = f.d.context(e);
    const int k = c.k;
    const Eigen::VectorXd q = project_interior(c, [k](Point2 p) { return Vec2(std::pow(p.x, k + 1), 0.0); });
    const std::vector<Point2> at(c.polygon.begin(), c.polygon.end());
    const Eigen::VectorXd oracle =
        lsq_fit_values(c.quad, k, c.centroid, c.h, [k](Point2 p) { return std::pow(p.x, k + 1); }, at);
    for (std::size_t i = 0; i < at.size(); ++i) {
      EXPECT_NEAR(c.interior_value(q, at[i])[0], oracle[i], 1e-12);
      EXPECT_NEAR(c.interior_value(q, at[i])[1], 0.0, 1e-14);
    }
  }
}

TEST(Projection, EdgeReproducesItsSpace) {
  for (EdgeSpace sp : {EdgeSpace::Full, EdgeSpace::Reduced}) {
    for (int k = 1; k <= 3; ++k) {
      const Point2 a{0.2, 0.1}, b{0.7, 0.4};
      const EdgeBasis eb(a, b, k, sp);
      const QuadRule r = build_edge_quadrature(a, b, 2 * k + 4);
      const Eigen::VectorXd c = project_edge(eb, r, [](Point2) { return Vec2(2.0, -3.0); });
      for (const Point2 p : {a, b, 0.5 * (a + b)}) EXPECT_LT((eb.values(p) * c - Vec2(2.0, -3.0)).norm(), 1e-13);
      // rigid motion traces
      auto rm = [](Point2 p) { return Vec2(0.3 - 1.7 * p.y, -0.2 + 1.7 * p.x); };
      const Eigen::VectorXd cr = project_edge(eb, r, rm);
      for (const Point2 p : {a, b, 0.5 * (a + b)}) EXPECT_LT((eb.values(p) * cr - rm(p)).norm(), 1e-13);
    }
  }
}

TEST(Projection, ReducedK1BestFitMatchesDenseOracle) {
  // unit edge on the x axis, w = (s^2, 0) with s the arc length
  const Point2 a{0, 0}, b{1, 0};
  const EdgeBasis eb(a, b, 1, EdgeSpace::Reduced);
  ASSERT_EQ(eb.dimension(), 3);
  const QuadRule r = build_edge_quadrature(a, b, 8);
  auto w = [](Point2 p) { return Vec2(p.x * p.x, 0.0); };
  const Eigen::VectorXd c = project_edge(eb, r, w);
  // oracle: span{(1,0), (0,1), (-y, x)} restricted to the edge = {(1,0), (0,1), (0,s)}
  Eigen::MatrixXd A(2 * r.size(), 3);
  Eigen::VectorXd rhs(2 * r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double sw = std::sqrt(r.weights[i]), s = r.points[i].x;
    A.row(2 * i) << sw, 0, 0;
    A.row(2 * i + 1) << 0, sw, sw * s;
    rhs[2 * i] = sw * s * s;
    rhs[2 * i + 1] = 0.0;
  }
  const Eigen::Vector3d o = A.colPivHouseholderQr().solve(rhs);
  EXPECT_NEAR(o[0], 1.0 / 3.0, 1e-14);
  for (const double s : {0.0, 0.3, 1.0}) {
    const Vec2 got = eb.values({s, 0}) * c;
    EXPECT_NEAR(got[0], o[0], 1e-13);
    EXPECT_NEAR(got[1], o[1] + o[2] * s, 1e-13);
  }
}

TEST(Projection, QhOfRigidMotionHasZeroStrain) {
  Fixture f;
  const Eigen::VectorXd rm = rigid_motion_dofs(f.d.space(), Vec2(0.4, -1.1), 0.8);
  for (int e = 0; e < f.d.num_elements(); ++e) {
    const Eigen::VectorXd v = f.d.gather(e, rm);
    EXPECT_LT(weak_strain(f.d.ops(e), v).norm(), 1e-12);
    EXPECT_LT(weak_divergence(f.d.ops(e), v).norm(), 1e-12);
    for (const Point2& p : f.d.context(e).polygon)
      EXPECT_LT((f.d.context(e).interior_value(v, p) - Vec2(0.4 - 0.8 * p.y, -1.1 + 0.8 * p.x)).norm(), 1e-13);
  }
}
