#include <gtest/gtest.h>

#include <wgelast/verify.hpp>
#include <wgelast/wgelast.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace wgelast;

namespace {

Eigen::VectorXd random_full(const Discretization& d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(d.layout().total);
  for (int i = 0; i < v.size(); ++i) v[i] = nd(rng);
  return v;
}

}  // namespace

TEST(Norms, RigidMotionsVanish) {
  const PolyMesh m = generate(GridFamily::B, 4, Layout::Square);
  const Discretization d(m, 2, DegreePolicy::for_family(GridFamily::B));
  const PiecewiseCoefficient coeff = example(6).coeff;
  const Eigen::VectorXd rm = rigid_motion_dofs(d.space(), Vec2(1.0, 2.0), -0.6);
  const Eigen::VectorXd v = random_full(d, 1);
  const double scale = energy_norm(d, coeff, v);
  EXPECT_LE(energy_norm(d, coeff, rm), 1e-10 * scale);
  EXPECT_LE(h1_seminorm(d, coeff, rm), 1e-10 * scale);
  EXPECT_GT(scale, 0.0);
  EXPECT_GT(h1_seminorm(d, coeff, v), 0.0);
}

TEST(Norms, EnergyNormIsQuadraticAndAdditive) {
  const PolyMesh m = generate(GridFamily::A, 2, Layout::Vertical);
  const Discretization d(m, 1, DegreePolicy::for_family(GridFamily::A));
  const PiecewiseCoefficient coeff = example(3).coeff;
  const Eigen::VectorXd v = random_full(d, 2);
  EXPECT_NEAR(energy_norm(d, coeff, 3.0 * v), 3.0 * energy_norm(d, coeff, v), 1e-12 * energy_norm(d, coeff, v));
  // sum of element stiffness quadratic forms
  double s = 0.0;
  for (int e = 0; e < d.num_elements(); ++e) {
    const Eigen::VectorXd ve = d.gather(e, v);
    const int sd = m.elements[e].subdomain;
    s += ve.dot(local_stiffness(d.ops(e), coeff.mu[sd], coeff.lambda[sd]) * ve);
  }
  EXPECT_NEAR(energy_norm(d, coeff, v), std::sqrt(s), 1e-12 * std::sqrt(s));
}

TEST(Norms, EquivalenceProbeIsPositive) {
  // single element: random non-rigid samples keep both norms away from zero
  detail::MeshBuilder b(Layout::Vertical);
  const std::vector<Point2> pent{{0.1, 0.1}, {0.45, 0.1}, {0.45, 0.45}, {0.1, 0.45}, {0.3, 0.2}};
  b.element(pent);
  const PolyMesh m = b.finish();
  const Discretization d(m, 1, DegreePolicy::for_family(GridFamily::A));
  const NormProbe p = norm_equivalence_probe(d, example(3).coeff, 100, 9);
  EXPECT_EQ(p.used, 100);
  EXPECT_GT(p.min_ratio, 0.0);
  EXPECT_GE(p.max_ratio, p.min_ratio);
  EXPECT_THROW(norm_equivalence_probe(d, example(3).coeff, 0, 9), std::invalid_argument);
}

TEST(Errors, InterpolantIsExactForDegreeK) {
  // piecewise quadratic solution, k = 2: Q_h u has zero energy error
  ManufacturedProblem pb = detail::make_problem(11, Layout::Vertical, 1, 10);
  const Poly2 x = Poly2::x(), y = Poly2::y();
  detail::attach(pb, {x * y, y * y - x}, {x * x, x * y + y});
  const PolyMesh m = generate(GridFamily::A, 2, Layout::Vertical);
  const Discretization d(m, 2, DegreePolicy::for_family(GridFamily::A), pb.data_degree());
  const ExactImages im = exact_weak_images(d, pb);
  EXPECT_LE(interpolant_energy_error(d, pb, im), 1e-10);
  const SolveResult r = solve(assemble(d, pb));
  EXPECT_LE(energy_error(d, pb, im, r.full), 1e-9);
  EXPECT_LE(l2_error(d, pb, r.full), 1e-10);
}

TEST(Errors, ErrorEquationResidual) {
  const ManufacturedProblem pb = example(6);
  const PolyMesh m = generate(GridFamily::B, 4, Layout::Square);
  const Discretization d(m, 1, DegreePolicy::for_family(GridFamily::B), pb.data_degree());
  const SparseSpdSystem sys = assemble(d, pb);
  const SolveResult r = solve(sys);
  const ErrorEquationResidual res = error_equation_residual(d, pb, exact_weak_images(d, pb), sys, r.full);
  EXPECT_GT(res.scale, 0.0);
  EXPECT_TRUE(res.pass());
}

TEST(Study, RatesOnExampleTwo) {
  StudyConfig c;
  c.example = 2;
  c.family = GridFamily::A;
  c.k = 2;
  c.level_first = 1;
  c.level_last = 3;
  const ConvergenceReport rep = run_study(c);
  ASSERT_EQ(rep.levels.size(), 3u);
  for (const auto& l : rep.levels) EXPECT_TRUE(l.failure.empty()) << l.failure;
  EXPECT_GT(rep.last().energy_rate, 1.5);
  EXPECT_GT(rep.last().l2_rate, 2.5);
  ASSERT_TRUE(rep.levels.front().error_equation.has_value());
  EXPECT_TRUE(rep.levels.front().error_equation->pass());

  std::ostringstream os;
  write_study_csv(rep, os);
  std::istringstream is(os.str());
  std::string header, row;
  std::getline(is, header);
  EXPECT_EQ(header, "level,h,ndof,l2_err,l2_rate,energy_err,energy_rate");
  std::getline(is, row);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 6);
  EXPECT_NE(row.find(",,"), std::string::npos);  // no rate on the first level
}

TEST(Study, SolveOnlyModeWritesFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "wgelast_study_test";
  std::filesystem::remove_all(dir);
  StudyConfig c;
  c.example = 1;
  c.family = GridFamily::B;
  c.k = 1;
  c.level_first = 1;
  c.level_last = 2;
  c.out_dir = dir.string();
  c.vtk = true;
  const ConvergenceReport rep = run_study(c);
  EXPECT_TRUE(rep.solve_only);
  for (const auto& l : rep.levels) {
    EXPECT_TRUE(l.failure.empty());
    EXPECT_LE(l.solve_residual, 1e-10);
    EXPECT_TRUE(std::isnan(l.l2_error));
  }
  int vtk = 0, csv = 0;
  for (const auto& f : std::filesystem::directory_iterator(dir)) {
    vtk += f.path().extension() == ".vtk";
    csv += f.path().extension() == ".csv";
  }
  EXPECT_EQ(vtk, 2);
  EXPECT_GE(csv, 1);
  std::filesystem::remove_all(dir);
}
