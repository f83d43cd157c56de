#include <gtest/gtest.h>

#include <wgelast/verify.hpp>
#include <wgelast/wgelast.hpp>

using namespace wgelast;

namespace {

PolyMesh single_triangle() {
  detail::MeshBuilder b(Layout::Vertical);
  const std::vector<Point2> tri{{0.05, 0.1}, {0.4, 0.15}, {0.2, 0.45}};
  b.element(tri);
  return b.finish();
}

int count_kind(const DofLayout& L, DofKind k) { return static_cast<int>(std::count(L.kind.begin(), L.kind.end(), k)); }

}  // namespace

TEST(Layout, SingleTriangleCounts) {
  const PolyMesh m = single_triangle();
  const WgSpace reduced = make_space(m, 1, DegreePolicy::for_family(GridFamily::A), 0, EdgeSpace::Reduced);
  EXPECT_EQ(reduced.layout.interior_block, 6);
  EXPECT_EQ(reduced.layout.edge_block, 3);
  EXPECT_EQ(reduced.layout.total, 15);
  EXPECT_EQ(count_kind(reduced.layout, DofKind::Boundary), 9);
  EXPECT_EQ(reduced.layout.num_free, 6);

  const WgSpace full = make_space(m, 1, DegreePolicy::for_family(GridFamily::A));
  EXPECT_EQ(full.layout.edge_block, 4);
  EXPECT_EQ(full.layout.total, 18);
  EXPECT_EQ(count_kind(full.layout, DofKind::Boundary), 12);
}

TEST(Layout, TypeAQuadraticCounts) {
  const PolyMesh m = generate(GridFamily::A, 2, Layout::Vertical);
  int interface_edges = 0;
  for (const auto& ed : m.edges) interface_edges += ed.tag == EdgeTag::Interface;
  ASSERT_EQ(interface_edges, 2);
  for (EdgeSpace sp : {EdgeSpace::Reduced, EdgeSpace::Full}) {
    const WgSpace s = make_space(m, 2, DegreePolicy::for_family(GridFamily::A), 0, sp);
    const int per_edge = sp == EdgeSpace::Reduced ? 4 : 6;
    EXPECT_EQ(s.layout.interior_block, 12);
    EXPECT_EQ(s.layout.edge_block, per_edge);
    EXPECT_EQ(s.layout.total, 12 * 8 + per_edge * (static_cast<int>(m.num_edges()) + interface_edges));
    EXPECT_EQ(count_kind(s.layout, DofKind::InterfaceR), per_edge * interface_edges);
  }
}

TEST(Layout, DegreePolicy) {
  EXPECT_EQ(DegreePolicy::parse("k+1").degree(2, 5), 3);
  EXPECT_EQ(DegreePolicy::parse("k+2").degree(2, 5), 4);
  EXPECT_EQ(DegreePolicy::parse("convex").degree(1, 5), 5);
  EXPECT_EQ(DegreePolicy::parse("nonconvex").degree(1, 5), 10);
  EXPECT_EQ(DegreePolicy::parse("6").degree(3, 3), 6);
  EXPECT_THROW(DegreePolicy::parse("1").degree(2, 3), std::invalid_argument);
  EXPECT_THROW(DegreePolicy::parse("fast"), std::invalid_argument);
  EXPECT_EQ(DegreePolicy::for_family(GridFamily::B).name(), "k+2");
}

TEST(System, SymmetricAndZeroDataGivesZero) {
  const PolyMesh m = generate(GridFamily::B, 2, Layout::Vertical);
  const Discretization d(m, 2, DegreePolicy::for_family(GridFamily::B));
  ManufacturedProblem pb = example(1);
  pb.constant_force = {0.0, 0.0};
  const SparseSpdSystem sys = assemble(d, pb);
  EXPECT_LT(Eigen::SparseMatrix<double>(sys.A - Eigen::SparseMatrix<double>(sys.A.transpose())).norm(), 1e-12 * sys.A.norm());
  EXPECT_EQ(sys.b.norm(), 0.0);
  const SolveResult r = solve(sys);
  EXPECT_EQ(r.x.norm(), 0.0);
  EXPECT_EQ(r.full.norm(), 0.0);
}

TEST(System, ConstraintsAreSatisfied) {
  const PolyMesh m = generate(GridFamily::A, 4, Layout::Square);
  const ManufacturedProblem pb = example(5);
  const Discretization d(m, 1, DegreePolicy::for_family(GridFamily::A), pb.data_degree());
  const SolveResult r = solve(assemble(d, pb));
  const WgSpace& s = d.space();
  const DofLayout& L = s.layout;
  for (std::size_t i = 0; i < m.num_edges(); ++i) {
    const Edge& ed = m.edges[i];
    const Eigen::VectorXd left = r.full.segment(L.edge_offset[i], L.edge_block);
    if (ed.tag == EdgeTag::Boundary) {
      const Eigen::VectorXd g = project_edge(s.edge_bases[i], s.edge_rules[i], [&](Point2 p) { return pb.boundary(p, 1); });
      EXPECT_LT((left - g).norm(), 1e-13);
    } else if (ed.tag == EdgeTag::Interface) {
      const Eigen::VectorXd right = r.full.segment(L.edge_offset_r[i], L.edge_block);
      const Eigen::VectorXd phi =
          project_edge(s.edge_bases[i], s.edge_rules[i], [&](Point2 p) { return jump_data(pb, p, ed.unit_normal).displacement; });
      EXPECT_LT((right - (left - phi)).norm(), 1e-12 * (1 + left.norm()));
    }
  }
}

TEST(System, CgAgreesWithCholesky) {
  for (GridFamily f : {GridFamily::A, GridFamily::B}) {
    const ManufacturedProblem pb = example(3);
    const PolyMesh m = generate(f, 4, Layout::Vertical);
    const Discretization d(m, 2, DegreePolicy::for_family(f), pb.data_degree());
    const SolverAgreement r = solver_agreement(d, pb);
    EXPECT_LE(r.cg_residual, 1e-10);
    EXPECT_LE(r.difference, 1e-8);
    EXPECT_LE(r.guess_difference, 1e-8);
  }
}

TEST(System, ResidualCheck) {
  const PolyMesh m = generate(GridFamily::A, 2, Layout::Vertical);
  const ManufacturedProblem pb = example(2);
  const Discretization d(m, 1, DegreePolicy::for_family(GridFamily::A), pb.data_degree());
  const SparseSpdSystem sys = assemble(d, pb);
  const SolveResult r = solve(sys);
  EXPECT_LE(residual_check(sys, r.x), 1e-10);
  Eigen::VectorXd bad = r.x;
  bad[0] += 1e-3;
  EXPECT_GT(residual_check(sys, bad), 1e-8);
}

TEST(System, IndefiniteMatrixIsRejected) {
  SparseSpdSystem sys;
  sys.A.resize(2, 2);
  sys.A.insert(0, 0) = 1.0;
  sys.A.insert(1, 1) = -1.0;
  sys.b = Eigen::VectorXd::Ones(2);
  sys.total = 2;
  sys.offset = Eigen::VectorXd::Zero(2);
  sys.free_index = {0, 1};
  EXPECT_THROW(solve(sys), std::runtime_error);
}

TEST(System, LinearSolutionIsRecoveredExactly) {
  // one element, u linear: the discrete solution is Q_h u
  const PolyMesh m = single_triangle();
  ManufacturedProblem pb = detail::make_problem(10, Layout::Vertical, 1, 1);
  const Poly2 x = Poly2::x(), y = Poly2::y();
  detail::attach(pb, {Poly2(), Poly2()}, {Rational(2) * x - y + Poly2(1), x + Rational(3) * y});
  const Discretization d(m, 1, DegreePolicy::for_family(GridFamily::A), 1);
  const SolveResult r = solve(assemble(d, pb));
  const Eigen::VectorXd q = project_Qh(d.space(), [&pb](Point2 p, int sd) { return pb.displacement(p, sd); });
  EXPECT_LT((r.full - q).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(System, UnconstrainedKernelIsRigidMotions) {
  for (GridFamily f : {GridFamily::A, GridFamily::B}) {
    const KernelResult r = kernel_check(generate(f, 2, Layout::Vertical), 1, DegreePolicy::for_family(f), example(3).coeff);
    EXPECT_EQ(r.near_zero, 3);
    EXPECT_GE(r.gap, 1e3);
  }
}

TEST(System, KPlusOneLeavesSpuriousModesOnTypeB) {
  const KernelResult r =
      kernel_check(generate(GridFamily::B, 2, Layout::Vertical), 1, DegreePolicy::parse("k+1"), example(3).coeff);
  EXPECT_GT(r.near_zero, 3);
}
