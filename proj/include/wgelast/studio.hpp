#pragma once

// Error norms, verification probes and the convergence-study driver.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "system.hpp"

namespace wgelast {

/// |||v||| = (sum_T 2 mu ||eps_w v||^2 + lambda ||div_w v||^2)^(1/2) for a full-layout vector.
inline double energy_norm(const Discretization& d, const PiecewiseCoefficient& coeff, const Eigen::VectorXd& full) {
  double s = 0.0;
  for (int e = 0; e < d.num_elements(); ++e) {
    const auto& op = d.ops(e);
    const int sd = d.context(e).subdomain;
    const Eigen::VectorXd v = d.gather(e, full);
    const Eigen::VectorXd eps = op.E * v, div = op.D * v;
    s += 2.0 * coeff.mu[sd] * op.strain_inner(eps, eps) + coeff.lambda[sd] * op.div_inner(div, div);
  }
  return std::sqrt(std::max(s, 0.0));
}

namespace detail {

/// Squared boundary mismatch sum_e ||v0 - vb||_e^2 on one element.
inline double trace_mismatch2(const ElementContext& c, const Eigen::VectorXd& v) {
  double s = 0.0;
  for (const auto& le : c.edges) {
    const Eigen::VectorXd vb = v.segment(le.dof_offset, le.basis->dimension());
    for (std::size_t q = 0; q < le.rule->size(); ++q) {
      const Point2 p = le.rule->points[q];
      s += le.rule->weights[q] * (c.interior_value(v, p) - le.basis->values(p) * vb).squaredNorm();
    }
  }
  return s;
}

/// (2 mu eps(v0), eps(v0)) + (lambda div v0, div v0) on one element.
inline double interior_energy2(const ElementContext& c, const Eigen::VectorXd& v, double mu, double lambda) {
  const int nk = c.pk.dimension();
  double s = 0.0;
  for (std::size_t q = 0; q < c.quad.size(); ++q) {
    const auto g = c.pk.gradients(c.quad.points[q]);
    const Eigen::Vector2d gx = g * v.segment(0, nk), gy = g * v.segment(nk, nk);  // grad of each component
    const double e11 = gx[0], e22 = gy[1], e12 = 0.5 * (gx[1] + gy[0]);
    s += c.quad.weights[q] * (2.0 * mu * (e11 * e11 + e22 * e22 + 2.0 * e12 * e12) + lambda * (e11 + e22) * (e11 + e22));
  }
  return s;
}

}  // namespace detail

/// ||v||_{1,h}: elementwise strain/divergence energy of v0 plus h_T^{-1} ||v0 - vb||^2 on dT.
inline double h1_seminorm(const Discretization& d, const PiecewiseCoefficient& coeff, const Eigen::VectorXd& full) {
  double s = 0.0;
  for (int e = 0; e < d.num_elements(); ++e) {
    const ElementContext& c = d.context(e);
    const Eigen::VectorXd v = d.gather(e, full);
    s += detail::interior_energy2(c, v, coeff.mu[c.subdomain], coeff.lambda[c.subdomain]) + detail::trace_mismatch2(c, v) / c.h;
  }
  return std::sqrt(s);
}

/// ||grad_w v||_0 without coefficient weights.
inline double weak_gradient_norm(const Discretization& d, const Eigen::VectorXd& full) {
  double s = 0.0;
  for (int e = 0; e < d.num_elements(); ++e) {
    const Eigen::VectorXd g = d.ops(e).G * d.gather(e, full);
    s += d.ops(e).gradient_inner(g, g);
  }
  return std::sqrt(s);
}

/// Weak images of the exact solution on every element: grad_w u = Q_r1 grad u,
/// eps_w u, div_w u.
struct ExactImages {
  std::vector<Eigen::VectorXd> grad, strain, div;
};

inline VectorField exact_on(const ManufacturedProblem& pb, int subdomain) {
  return [&pb, subdomain](Point2 p) { return pb.displacement(p, subdomain); };
}

inline ExactImages exact_weak_images(const Discretization& d, const ManufacturedProblem& pb) {
  ExactImages im;
  for (int e = 0; e < d.num_elements(); ++e) {
    const ElementContext& c = d.context(e);
    const auto w = exact_on(pb, c.subdomain);
    im.grad.push_back(weak_gradient_of(c, d.ops(e), w));
    im.strain.push_back(symmetric_part(im.grad.back(), d.ops(e).dim1));
    im.div.push_back(weak_divergence_of(c, d.ops(e), w));
  }
  return im;
}

/// |||u - u_h||| with u entering through its exact weak images.
inline double energy_error(const Discretization& d, const ManufacturedProblem& pb, const ExactImages& im,
                           const Eigen::VectorXd& uh) {
  double s = 0.0;
  for (int e = 0; e < d.num_elements(); ++e) {
    const auto& op = d.ops(e);
    const int sd = d.context(e).subdomain;
    const Eigen::VectorXd v = d.gather(e, uh);
    const Eigen::VectorXd de = im.strain[e] - op.E * v, dd = im.div[e] - op.D * v;
    s += 2.0 * pb.coeff.mu[sd] * op.strain_inner(de, de) + pb.coeff.lambda[sd] * op.div_inner(dd, dd);
  }
  return std::sqrt(std::max(s, 0.0));
}

/// ||grad_w (u - u_h)||_0.
inline double weak_gradient_error(const Discretization& d, const ExactImages& im, const Eigen::VectorXd& uh) {
  double s = 0.0;
  for (int e = 0; e < d.num_elements(); ++e) {
    const Eigen::VectorXd dg = im.grad[e] - d.ops(e).G * d.gather(e, uh);
    s += d.ops(e).gradient_inner(dg, dg);
  }
  return std::sqrt(std::max(s, 0.0));
}

/// ||u - u_0||_0 by elementwise quadrature.
inline double l2_error(const Discretization& d, const ManufacturedProblem& pb, const Eigen::VectorXd& uh) {
  double s = 0.0;
  for (int e = 0; e < d.num_elements(); ++e) {
    const ElementContext& c = d.context(e);
    const Eigen::VectorXd v = d.gather(e, uh);
    for (std::size_t q = 0; q < c.quad.size(); ++q) {
      const Point2 p = c.quad.points[q];
      s += c.quad.weights[q] * (pb.displacement(p, c.subdomain) - c.interior_value(v, p)).squaredNorm();
    }
  }
  return std::sqrt(s);
}

/// ||{u - u_0, u - u_b}||_{1,h}.
inline double h1_error(const Discretization& d, const ManufacturedProblem& pb, const Eigen::VectorXd& uh) {
  double s = 0.0;
  for (int e = 0; e < d.num_elements(); ++e) {
    const ElementContext& c = d.context(e);
    const Eigen::VectorXd v = d.gather(e, uh);
    const auto& ex = (*pb.exact)[c.subdomain];
    const double mu = pb.coeff.mu[c.subdomain], lam = pb.coeff.lambda[c.subdomain];
    const int nk = c.pk.dimension();
    for (std::size_t q = 0; q < c.quad.size(); ++q) {
      const Point2 p = c.quad.points[q];
      const auto g = c.pk.gradients(p);
      Eigen::Matrix2d gh;
      gh.row(0) = (g * v.segment(0, nk)).transpose();
      gh.row(1) = (g * v.segment(nk, nk)).transpose();
      const Eigen::Matrix2d ge = ex.gradient(p) - gh;
      const Eigen::Matrix2d eps = 0.5 * (ge + ge.transpose());
      s += c.quad.weights[q] * (2.0 * mu * eps.squaredNorm() + lam * ge.trace() * ge.trace());
    }
    s += detail::trace_mismatch2(c, v) / c.h;
  }
  return std::sqrt(s);
}

/// |||u - Q_h u|||.
inline double interpolant_energy_error(const Discretization& d, const ManufacturedProblem& pb, const ExactImages& im) {
  const Eigen::VectorXd qh = project_Qh(d.space(), [&pb](Point2 p, int sd) { return pb.displacement(p, sd); });
  return energy_error(d, pb, im, qh);
}

struct ErrorEquationResidual {
  double max_abs = 0.0;  // max over free test basis vectors of |a(e_h, v) - l(u, v)|
  double scale = 0.0;    // ||A||_inf * ||Q_h u - u_h||_2
  bool pass(double tol = 1e-8) const { return max_abs <= tol * scale; }
};

/// Residual of the error equation a(e_h, v) = l(u, v) over the free test basis.
inline ErrorEquationResidual error_equation_residual(const Discretization& d, const ManufacturedProblem& pb,
                                                     const ExactImages& im, const SparseSpdSystem& sys,
                                                     const Eigen::VectorXd& uh) {
  const PolyMesh& m = d.mesh();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(sys.size());
  for (int e = 0; e < d.num_elements(); ++e) {
    const ElementContext& c = d.context(e);
    const auto& op = d.ops(e);
    const int sd = c.subdomain;
    const double mu = pb.coeff.mu[sd], lam = pb.coeff.lambda[sd];
    const auto& ex = (*pb.exact)[sd];
    const Eigen::VectorXd v = d.gather(e, uh);

    // a_T(e_h, phi_i) for every local basis function phi_i
    const Eigen::VectorXd de = im.strain[e] - op.E * v, dd = im.div[e] - op.D * v;
    const int d1 = op.dim1;
    Eigen::VectorXd wde(3 * d1);
    wde << op.M1 * de.segment(0, d1), op.M1 * de.segment(d1, d1), 2.0 * (op.M1 * de.segment(2 * d1, d1));
    Eigen::VectorXd local = 2.0 * mu * op.E.transpose() * wde + lam * op.D.transpose() * (op.M2 * dd);

    // l_T(u, phi_i) with the projections Q_r1 eps(u), Q_r2 div u computed directly
    Eigen::VectorXd qeps[3];
    const std::array<std::pair<int, int>, 3> comp{{{0, 0}, {1, 1}, {0, 1}}};
    for (int t = 0; t < 3; ++t) {
      const Poly2& f = ex.strain[comp[t].first][comp[t].second];
      qeps[t] = project_scalar(c.pr1, c.quad, [&f](Point2 p) { return f(p); });
    }
    const Eigen::VectorXd qdiv = project_scalar(c.pr2, c.quad, [&ex](Point2 p) { return ex.div(p); });
    const int nk = c.pk.dimension();
    for (const auto& le : c.edges) {
      const Vec2 n(le.normal.x, le.normal.y);
      for (std::size_t q = 0; q < le.rule->size(); ++q) {
        const Point2 p = le.rule->points[q];
        const Eigen::VectorXd m1 = c.pr1.values(p);
        Eigen::Matrix2d deps;
        deps(0, 0) = m1.dot(qeps[0]) - ex.strain[0][0](p);
        deps(1, 1) = m1.dot(qeps[1]) - ex.strain[1][1](p);
        deps(0, 1) = deps(1, 0) = m1.dot(qeps[2]) - ex.strain[0][1](p);
        const double ddiv = c.pr2.values(p).dot(qdiv) - ex.div(p);
        const Vec2 t = le.rule->weights[q] * (2.0 * mu * deps * n + lam * ddiv * n);
        const Eigen::VectorXd phi = c.pk.values(p);
        local.segment(0, nk) += t[0] * phi;  // -(v0 . t) moved to the left-hand side
        local.segment(nk, nk) += t[1] * phi;
        local.segment(le.dof_offset, le.basis->dimension()) -= le.basis->values(p).transpose() * t;
      }
    }
    const auto g = d.layout().local_to_global(m, e);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const int I = sys.free_index[g[i]];
      if (I >= 0) r[I] += local[i];
    }
  }
  ErrorEquationResidual out;
  out.max_abs = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  double anorm = 0.0;
  for (int j = 0; j < sys.A.outerSize(); ++j) {
    double col = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, j); it; ++it) col += std::abs(it.value());
    anorm = std::max(anorm, col);
  }
  const Eigen::VectorXd qh = project_Qh(d.space(), [&pb](Point2 p, int sd) { return pb.displacement(p, sd); });
  out.scale = anorm * (qh - uh).norm();
  return out;
}

struct NormProbe {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  int used = 0;
  int skipped = 0;
};

/// Ratio |||v||| / ||v||_{1,h} over random v in V_h^0 (boundary blocks zero,
/// interface blocks tied).
inline NormProbe norm_equivalence_probe(const Discretization& d, const PiecewiseCoefficient& coeff, int samples,
                                        unsigned seed = 12345) {
  if (samples < 1) throw std::invalid_argument("norm_equivalence_probe: samples must be >= 1");
  const DofLayout& L = d.layout();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  NormProbe p;
  p.min_ratio = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x(L.num_free);
    for (int i = 0; i < L.num_free; ++i) x[i] = nd(rng);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(L.total);
    for (int g = 0; g < L.total; ++g)
      if (L.free_index[g] >= 0) full[g] = x[L.free_index[g]];
    const double h1 = h1_seminorm(d, coeff, full);
    if (h1 < 1e-13) {
      ++p.skipped;
      continue;
    }
    const double r = energy_norm(d, coeff, full) / h1;
    p.min_ratio = std::min(p.min_ratio, r);
    p.max_ratio = std::max(p.max_ratio, r);
    ++p.used;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Convergence studies

struct StudyConfig {
  int example = 2;
  GridFamily family = GridFamily::A;
  int k = 1;
  std::optional<DegreePolicy> policy;  // default: per family
  int level_first = 1;
  int level_last = 4;
  int n0 = 0;  // 0: smallest admissible grid for the layout
  SolverKind solver = SolverKind::Auto;
  std::string out_dir;  // empty: no files
  bool vtk = false;
  bool residual_gate_all_levels = false;

  DegreePolicy effective_policy() const { return policy ? *policy : DegreePolicy::for_family(family); }
};

struct ErrorReport {
  int level = 0;
  int n = 0;
  double h = 0.0;
  int ndof = 0;
  double l2_error = NAN, energy_error = NAN, grad_error = NAN, h1_error = NAN, interp_error = NAN;
  double l2_rate = NAN, energy_rate = NAN, grad_rate = NAN;
  double solve_residual = NAN;
  std::optional<ErrorEquationResidual> error_equation;
  std::string failure;  // non-empty when the level failed
  double seconds = 0.0;
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<ErrorReport> levels;
  bool solve_only = false;

  const ErrorReport& last() const { return levels.back(); }
};

inline double rate(double coarse, double fine) { return std::log2(coarse / fine); }

/// Legacy-VTK export of u_0: each element with its own vertex copies plus a
/// centroid vertex cell; point data is the interior polynomial.
inline void write_solution_vtk(const Discretization& d, const Eigen::VectorXd& full, std::ostream& os) {
  const PolyMesh& m = d.mesh();
  std::vector<Point2> pts;
  std::vector<Vec2> vals;
  std::vector<std::vector<int>> cells;
  std::vector<int> cell_type, cell_sd;
  for (int e = 0; e < d.num_elements(); ++e) {
    const ElementContext& c = d.context(e);
    const Eigen::VectorXd v = d.gather(e, full);
    std::vector<int> ids;
    for (const Point2& p : c.polygon) {
      ids.push_back(static_cast<int>(pts.size()));
      pts.push_back(p);
      vals.push_back(c.interior_value(v, p));
    }
    cells.push_back(ids);
    cell_type.push_back(7);
    cell_sd.push_back(c.subdomain);
    cells.push_back({static_cast<int>(pts.size())});
    pts.push_back(c.centroid);
    vals.push_back(c.interior_value(v, c.centroid));
    cell_type.push_back(1);
    cell_sd.push_back(c.subdomain);
  }
  (void)m;
  os << "# vtk DataFile Version 3.0\nwgelast solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << std::setprecision(17);
  os << "POINTS " << pts.size() << " double\n";
  for (const auto& p : pts) os << p.x << ' ' << p.y << " 0\n";
  std::size_t total = 0;
  for (const auto& c : cells) total += c.size() + 1;
  os << "CELLS " << cells.size() << ' ' << total << '\n';
  for (const auto& c : cells) {
    os << c.size();
    for (int i : c) os << ' ' << i;
    os << '\n';
  }
  os << "CELL_TYPES " << cells.size() << '\n';
  for (int t : cell_type) os << t << '\n';
  os << "CELL_DATA " << cells.size() << "\nSCALARS subdomain int 1\nLOOKUP_TABLE default\n";
  for (int s : cell_sd) os << s << '\n';
  os << "POINT_DATA " << pts.size() << "\nVECTORS displacement double\n";
  for (const auto& v : vals) os << v[0] << ' ' << v[1] << " 0\n";
}

inline void write_coefficients_csv(const Eigen::VectorXd& full, std::ostream& os) {
  os << "index,value\n" << std::setprecision(17);
  for (int i = 0; i < full.size(); ++i) os << i << ',' << full[i] << '\n';
}

inline void write_study_csv(const ConvergenceReport& rep, std::ostream& os) {
  auto num = [&os](double v) {
    if (std::isfinite(v)) os << v;
  };
  os << "level,h,ndof,l2_err,l2_rate,energy_err,energy_rate\n" << std::setprecision(10);
  for (const auto& r : rep.levels) {
    os << r.level << ',';
    num(r.h);
    os << ',' << r.ndof << ',';
    num(r.l2_error);
    os << ',';
    num(r.l2_rate);
    os << ',';
    num(r.energy_error);
    os << ',';
    num(r.energy_rate);
    os << '\n';
  }
}

inline std::string study_name(const StudyConfig& c) {
  std::ostringstream os;
  os << "example" << c.example << "_" << (c.family == GridFamily::A ? "a" : "b") << "_k" << c.k;
  return os.str();
}

/// Run one refinement study. Solver failures are recorded per level and the
/// study continues.
inline ConvergenceReport run_study(const StudyConfig& cfg, std::ostream* log = nullptr) {
  if (cfg.k < 1) throw std::invalid_argument("run_study: k must be >= 1");
  if (cfg.level_first < 1 || cfg.level_last < cfg.level_first) throw std::invalid_argument("run_study: empty level range");
  const ManufacturedProblem pb = example(cfg.example);
  ConvergenceReport rep;
  rep.config = cfg;
  rep.solve_only = !pb.has_exact();
  const MeshFamily fam{cfg.family, pb.layout, cfg.n0};
  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);

  for (int level = cfg.level_first; level <= cfg.level_last; ++level) {
    ErrorReport r;
    r.level = level;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const PolyMesh mesh = refine(fam, level);
      r.n = mesh.cells_per_side;
      r.h = mesh.h;
      const Discretization d(mesh, cfg.k, cfg.effective_policy(), pb.data_degree());
      const SparseSpdSystem sys = assemble(d, pb);
      r.ndof = sys.size();
      SolveOptions opt;
      opt.kind = cfg.solver;
      const SolveResult sol = solve(sys, opt);
      r.solve_residual = sol.residual;
      if (pb.has_exact()) {
        const ExactImages im = exact_weak_images(d, pb);
        r.l2_error = l2_error(d, pb, sol.full);
        r.energy_error = energy_error(d, pb, im, sol.full);
        r.grad_error = weak_gradient_error(d, im, sol.full);
        r.h1_error = h1_error(d, pb, sol.full);
        r.interp_error = interpolant_energy_error(d, pb, im);
        if (level == cfg.level_first || cfg.residual_gate_all_levels)
          r.error_equation = error_equation_residual(d, pb, im, sys, sol.full);
      }
      if (!cfg.out_dir.empty()) {
        const std::string stem = cfg.out_dir + "/" + study_name(cfg) + "_level" + std::to_string(level);
        std::ofstream coef(stem + "_coefficients.csv");
        write_coefficients_csv(sol.full, coef);
        if (cfg.vtk) {
          std::ofstream vtk(stem + ".vtk");
          write_solution_vtk(d, sol.full, vtk);
        }
      }
    } catch (const std::exception& ex) {
      r.failure = ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!rep.levels.empty()) {
      const auto& p = rep.levels.back();
      r.l2_rate = rate(p.l2_error, r.l2_error);
      r.energy_rate = rate(p.energy_error, r.energy_error);
      r.grad_rate = rate(p.grad_error, r.grad_error);
    }
    if (log) {
      *log << std::setprecision(4) << "  level " << level << " n=" << r.n << " ndof=" << r.ndof;
      if (!r.failure.empty()) {
        *log << " FAILED: " << r.failure << '\n';
      } else if (rep.solve_only) {
        *log << " residual=" << r.solve_residual << " (" << r.seconds << " s)\n";
      } else {
        *log << std::scientific << " l2=" << r.l2_error << " energy=" << r.energy_error << std::fixed
             << " rates " << r.l2_rate << " / " << r.energy_rate << " (" << r.seconds << " s)" << std::defaultfloat << '\n';
      }
    }
    rep.levels.push_back(std::move(r));
  }
  if (!cfg.out_dir.empty()) {
    std::ofstream csv(cfg.out_dir + "/" + study_name(cfg) + ".csv");
    write_study_csv(rep, csv);
  }
  return rep;
}

}  // namespace wgelast
