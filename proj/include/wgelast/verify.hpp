#pragma once

// Property checks shared by the acceptance driver and `wg-elastic verify`.

#include <boost/math/quadrature/gauss.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "studio.hpp"

namespace wgelast {

/// Random vector polynomial of total degree <= `degree`, written in the
/// scaled coordinates of (center, scale) with coefficients in [-1, 1].
struct RandomVectorPoly {
  SubdomainSolution sol;  // u, grad, strain, div (unit Lame values; stress unused)
  Point2 center;
  double scale = 1.0;

  RandomVectorPoly(int degree, Point2 c, double h, std::mt19937_64& rng) : center(c), scale(h) {
    std::uniform_int_distribution<int> coef(-1000, 1000);
    PolyVec u;
    for (int a = 0; a < 2; ++a)
      for (int i = 0; i <= degree; ++i)
        for (int j = 0; i + j <= degree; ++j) u[a] = u[a] + Poly2::monomial(i, j, Rational(coef(rng), 1000));
    sol = SubdomainSolution(u, 1, 1);
  }
  Point2 local(Point2 p) const { return {(p.x - center.x) / scale, (p.y - center.y) / scale}; }
  Vec2 value(Point2 p) const { return sol.value(local(p)); }
  // Derivatives carry one factor 1/scale.
  double strain(int a, int b, Point2 p) const { return sol.strain[a][b](local(p)) / scale; }
  double div(Point2 p) const { return sol.div(local(p)) / scale; }
};

struct CommutationResult {
  double strain_error = 0.0;  // max coefficient error, relative to max(1, |coefficients|)
  double div_error = 0.0;
  int samples = 0;
};

/// eps_w{w, w|dT} = Q_r1 eps(w) and div_w{w, w|dT} = Q_r2 div w for random
/// w of degree r1 + 1 on every element of `m`.
inline CommutationResult commutation_check(const PolyMesh& m, int k, DegreePolicy policy, int samples_per_element,
                                           unsigned seed) {
  std::mt19937_64 rng(seed);
  int rmax = 0;
  for (const auto& el : m.elements) rmax = std::max(rmax, policy.degree(k, static_cast<int>(el.vertex_ids.size())));
  const Discretization d(m, k, policy, rmax + 1);
  CommutationResult out;
  for (int e = 0; e < d.num_elements(); ++e) {
    const ElementContext& c = d.context(e);
    const ElementOperators& op = d.ops(e);
    for (int s = 0; s < samples_per_element; ++s) {
      const RandomVectorPoly w(c.r1 + 1, c.centroid, c.h, rng);
      const Eigen::VectorXd eps = weak_strain_of(c, op, [&w](Point2 p) { return w.value(p); });
      const Eigen::VectorXd div = weak_divergence_of(c, op, [&w](Point2 p) { return w.value(p); });
      Eigen::VectorXd ref(3 * op.dim1);
      ref << project_scalar(c.pr1, c.quad, [&w](Point2 p) { return w.strain(0, 0, p); }),
          project_scalar(c.pr1, c.quad, [&w](Point2 p) { return w.strain(1, 1, p); }),
          project_scalar(c.pr1, c.quad, [&w](Point2 p) { return w.strain(0, 1, p); });
      const Eigen::VectorXd dref = project_scalar(c.pr2, c.quad, [&w](Point2 p) { return w.div(p); });
      out.strain_error = std::max(out.strain_error, (eps - ref).lpNorm<Eigen::Infinity>() / std::max(1.0, ref.lpNorm<Eigen::Infinity>()));
      out.div_error = std::max(out.div_error, (div - dref).lpNorm<Eigen::Infinity>() / std::max(1.0, dref.lpNorm<Eigen::Infinity>()));
      ++out.samples;
    }
  }
  return out;
}

struct KernelResult {
  int near_zero = 0;    // eigenvalues <= 1e-9 * lambda_max
  double gap = 0.0;     // lambda_4 / max(|lambda_1..3|, 1e-16 lambda_max)
  double lambda4 = 0.0; // relative to lambda_max
  int size = 0;
};

/// Spectrum of the unconstrained global stiffness (no Dirichlet data,
/// interface blocks tied).
inline KernelResult kernel_check(const PolyMesh& m, int k, DegreePolicy policy, const PiecewiseCoefficient& coeff) {
  const Discretization d(m, k, policy);
  const SparseSpdSystem sys = assemble_unconstrained(d, coeff);
  const Eigen::MatrixXd A(sys.A);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  KernelResult r;
  r.size = static_cast<int>(ev.size());
  const double mx = ev.maxCoeff();
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] <= 1e-9 * mx) ++r.near_zero;
  if (ev.size() >= 4) {
    const double low = std::max(ev.head(3).cwiseAbs().maxCoeff(), 1e-16 * mx);
    r.gap = ev[3] / low;
    r.lambda4 = ev[3] / mx;
  }
  return r;
}

struct NormEquivalenceResult {
  std::vector<NormProbe> levels;
  double min_drift = 0.0;  // max/min of the per-level minimum ratios
  double max_drift = 0.0;
  bool covanish = true;    // rigid-motion interpolants: both norms vanish together
  bool nonzero = true;     // random samples: neither norm vanishes alone
};

/// Interpolant of a global rigid motion.
inline Eigen::VectorXd rigid_motion_dofs(const WgSpace& s, Vec2 a, double eta) {
  return project_Qh(s, [a, eta](Point2 p, int) { return Vec2(a[0] - eta * p.y, a[1] + eta * p.x); });
}

inline NormEquivalenceResult norm_equivalence_levels(const MeshFamily& fam, int k, DegreePolicy policy,
                                                     const PiecewiseCoefficient& coeff, int levels, int samples,
                                                     unsigned seed) {
  NormEquivalenceResult out;
  for (int level = 1; level <= levels; ++level) {
    const PolyMesh m = refine(fam, level);
    const Discretization d(m, k, policy);
    NormProbe p = norm_equivalence_probe(d, coeff, samples, seed + level);
    if (p.skipped > 0 || !(p.min_ratio > 0)) out.nonzero = false;
    out.levels.push_back(p);

    // scale: norms of one random V_h^0 vector
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d.layout().total);
    for (int g = 0; g < d.layout().total; ++g) v[g] = nd(rng);
    const double scale = std::max(energy_norm(d, coeff, v), h1_seminorm(d, coeff, v));
    const Eigen::VectorXd rm = rigid_motion_dofs(d.space(), Vec2(0.3, -0.7), 1.3);
    const double en = energy_norm(d, coeff, rm), h1 = h1_seminorm(d, coeff, rm);
    if ((en <= 1e-12 * scale) != (h1 <= 1e-12 * scale) || en > 1e-12 * scale) out.covanish = false;
  }
  double lo_min = std::numeric_limits<double>::infinity(), lo_max = 0, hi_min = std::numeric_limits<double>::infinity(), hi_max = 0;
  for (const auto& p : out.levels) {
    lo_min = std::min(lo_min, p.min_ratio);
    lo_max = std::max(lo_max, p.min_ratio);
    hi_min = std::min(hi_min, p.max_ratio);
    hi_max = std::max(hi_max, p.max_ratio);
  }
  out.min_drift = lo_max / lo_min;
  out.max_drift = hi_max / hi_min;
  return out;
}

/// Monomial sweep of an element rule against the boundary-integral oracle
///   int_T X^a Y^b = sum_e n_x int_e h X^(a+1) Y^b / (a+1) ds,
/// X = (x - xc)/h, Y = (y - yc)/h. Errors are relative to |T|, which bounds
/// the integral of |X^a Y^b| on T.
inline double quadrature_sweep_error(std::span<const Point2> polygon, const QuadRule& rule) {
  const Point2 c = polygon_centroid(polygon);
  const double h = polygon_diameter(polygon);
  const double area = std::abs(signed_area(polygon));
  double worst = 0.0;
  const int N = static_cast<int>(polygon.size());
  for (int deg = 0; deg <= rule.exactness_degree; ++deg)
    for (int a = 0; a <= deg; ++a) {
      const int b = deg - a;
      auto mono = [&](Point2 p) { return std::pow((p.x - c.x) / h, a) * std::pow((p.y - c.y) / h, b); };
      double exact = 0.0;
      for (int i = 0; i < N; ++i) {
        const Point2 p0 = polygon[i], p1 = polygon[(i + 1) % N];
        const double len = norm(p1 - p0);
        const double nx = (p1.y - p0.y) / len;  // outward for a counter-clockwise loop
        auto f = [&](double t) {
          const Point2 p = p0 + t * (p1 - p0);
          return h * std::pow((p.x - c.x) / h, a + 1) * std::pow((p.y - c.y) / h, b) / (a + 1);
        };
        exact += nx * len * boost::math::quadrature::gauss<double, 30>::integrate(f, 0.0, 1.0);
      }
      worst = std::max(worst, std::abs(integrate(rule, mono) - exact) / area);
    }
  return worst;
}

struct SolverAgreement {
  double cg_residual = 0.0;
  double difference = 0.0;  // ||x_cg - x_chol|| / ||x_chol||
  double guess_difference = 0.0;  // two CG initial guesses
};

inline SolverAgreement solver_agreement(const Discretization& d, const ManufacturedProblem& pb, unsigned seed = 7) {
  const SparseSpdSystem sys = assemble(d, pb);
  SolveOptions chol;
  chol.kind = SolverKind::Cholesky;
  SolveOptions cg;
  cg.kind = SolverKind::CG;
  const SolveResult a = solve(sys, chol);
  const SolveResult b = solve(sys, cg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd guess(sys.size());
  for (int i = 0; i < guess.size(); ++i) guess[i] = nd(rng);
  cg.initial_guess = &guess;
  const SolveResult c = solve(sys, cg);
  SolverAgreement r;
  r.cg_residual = std::max(b.residual, c.residual);
  r.difference = (b.x - a.x).norm() / std::max(a.x.norm(), 1e-300);
  r.guess_difference = (c.x - b.x).norm() / std::max(b.x.norm(), 1e-300);
  return r;
}

}  // namespace wgelast
