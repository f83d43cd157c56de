#pragma once

// Global assembly with constraint elimination, and the sparse SPD solve.
//
// Boundary edge blocks are fixed to Q_b g. The right-side block of every
// interface edge is tied to the left-side block, u_R = u_L - Q_b phi, so a
// free interface DOF carries a test function that is single valued across
// the interface. With u = P x + c (P the 0/1 prolongation from free DOFs,
// c the fixed offsets) the reduced system is P^T A P x = P^T (F - A c), which
// keeps the symmetry and definiteness of the element stiffness sum.

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "problems.hpp"
#include "weakops.hpp"

namespace wgelast {

/// A mesh, its weak space, and the cached element-local operators.
/// Holds a reference to the mesh, which must outlive it.
class Discretization {
 public:
  Discretization(PolyMesh&&, int, DegreePolicy, int = 0, EdgeSpace = EdgeSpace::Full) = delete;
  Discretization(const PolyMesh& mesh, int k, DegreePolicy policy, int data_degree = 0,
                 EdgeSpace edge_space = EdgeSpace::Full)
      : mesh_(&mesh), space_(std::make_unique<WgSpace>(make_space(mesh, k, policy, data_degree, edge_space))) {
    contexts_.reserve(mesh.num_elements());
    ops_.reserve(mesh.num_elements());
    for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e) {
      contexts_.push_back(make_element_context(*space_, e));
      ops_.push_back(build_element_operators(contexts_.back()));
    }
  }

  const PolyMesh& mesh() const { return *mesh_; }
  const WgSpace& space() const { return *space_; }
  const DofLayout& layout() const { return space_->layout; }
  const ElementContext& context(int e) const { return contexts_[e]; }
  const ElementOperators& ops(int e) const { return ops_[e]; }
  int num_elements() const { return static_cast<int>(contexts_.size()); }
  int k() const { return space_->k; }

  Eigen::VectorXd gather(int e, const Eigen::VectorXd& full) const { return wgelast::gather(*space_, e, full); }

 private:
  const PolyMesh* mesh_;
  std::unique_ptr<WgSpace> space_;  // stable address: contexts point into it
  std::vector<ElementContext> contexts_;
  std::vector<ElementOperators> ops_;
};

/// Reduced system over the free DOFs.
struct SparseSpdSystem {
  Eigen::SparseMatrix<double> A;  // symmetric, both triangles stored
  Eigen::VectorXd b;
  Eigen::VectorXd offset;        // full layout: fixed values, or the shift of tied DOFs
  std::vector<int> free_index;   // full layout -> free index (-1 if fixed)
  int total = 0;

  int size() const { return static_cast<int>(b.size()); }

  /// Full-layout coefficient vector from a free-DOF vector.
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& x) const {
    Eigen::VectorXd full = offset;
    for (int g = 0; g < total; ++g)
      if (free_index[g] >= 0) full[g] += x[free_index[g]];
    return full;
  }
};

namespace detail {

inline void assemble_matrix(const Discretization& d, const PiecewiseCoefficient& coeff, SparseSpdSystem& sys,
                            const std::vector<Eigen::VectorXd>* element_loads) {
  const PolyMesh& m = d.mesh();
  const int n = static_cast<int>(sys.b.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (int e = 0; e < d.num_elements(); ++e) {
    const int sd = m.elements[e].subdomain;
    const Eigen::MatrixXd At = d.ops(e).stiffness(coeff.mu[sd], coeff.lambda[sd]);
    const auto g = d.layout().local_to_global(m, e);
    const int nl = static_cast<int>(g.size());
    Eigen::VectorXd c(nl);
    for (int i = 0; i < nl; ++i) c[i] = sys.offset[g[i]];
    Eigen::VectorXd rhs = -(At * c);
    if (element_loads) rhs += (*element_loads)[e];
    for (int i = 0; i < nl; ++i) {
      const int I = sys.free_index[g[i]];
      if (I < 0) continue;
      sys.b[I] += rhs[i];
      for (int j = 0; j < nl; ++j) {
        const int J = sys.free_index[g[j]];
        if (J < 0 || J < I) continue;
        trip.emplace_back(I, J, At(i, j));
      }
    }
  }
  Eigen::SparseMatrix<double> upper(n, n);
  upper.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<double> strict = upper.triangularView<Eigen::StrictlyUpper>();
  sys.A = upper + Eigen::SparseMatrix<double>(strict.transpose());
  sys.A.makeCompressed();
}

}  // namespace detail

/// Fixed boundary values and interface shifts for `pb`, in full layout.
inline Eigen::VectorXd constraint_offsets(const Discretization& d, const ManufacturedProblem& pb) {
  const PolyMesh& m = d.mesh();
  const WgSpace& s = d.space();
  const DofLayout& L = s.layout;
  Eigen::VectorXd off = Eigen::VectorXd::Zero(L.total);
  if (!pb.has_exact()) return off;  // homogeneous data
  for (int i = 0; i < static_cast<int>(m.num_edges()); ++i) {
    const Edge& ed = m.edges[i];
    if (ed.tag == EdgeTag::Boundary) {
      const int sd = m.elements[ed.left_element].subdomain;
      off.segment(L.edge_offset[i], L.edge_block) =
          project_edge(s.edge_bases[i], s.edge_rules[i], [&](Point2 p) { return pb.boundary(p, sd); });
    } else if (ed.tag == EdgeTag::Interface) {
      off.segment(L.edge_offset_r[i], L.edge_block) =
          -project_edge(s.edge_bases[i], s.edge_rules[i],
                        [&](Point2 p) { return jump_data(pb, p, ed.unit_normal).displacement; });
    }
  }
  return off;
}

/// Load vectors (f, v0)_T per element in local numbering.
inline std::vector<Eigen::VectorXd> element_loads(const Discretization& d, const ManufacturedProblem& pb) {
  std::vector<Eigen::VectorXd> loads;
  loads.reserve(d.num_elements());
  for (int e = 0; e < d.num_elements(); ++e) {
    const ElementContext& c = d.context(e);
    const int nk = c.pk.dimension();
    Eigen::VectorXd l = Eigen::VectorXd::Zero(c.num_local());
    for (std::size_t q = 0; q < c.quad.size(); ++q) {
      const Vec2 f = body_force(pb, c.quad.points[q], c.subdomain);
      const Eigen::VectorXd phi = c.pk.values(c.quad.points[q]);
      l.segment(0, nk) += c.quad.weights[q] * f[0] * phi;
      l.segment(nk, nk) += c.quad.weights[q] * f[1] * phi;
    }
    loads.push_back(std::move(l));
  }
  return loads;
}

/// Assemble the reduced SPD system for problem `pb`.
inline SparseSpdSystem assemble(const Discretization& d, const ManufacturedProblem& pb) {
  const PolyMesh& m = d.mesh();
  const DofLayout& L = d.layout();
  SparseSpdSystem sys;
  sys.total = L.total;
  sys.free_index = L.free_index;
  sys.offset = constraint_offsets(d, pb);
  sys.b = Eigen::VectorXd::Zero(L.num_free);
  const auto loads = element_loads(d, pb);
  detail::assemble_matrix(d, pb.coeff, sys, &loads);

  // Traction jump, tested with the single-valued interface trace (left block).
  if (pb.has_exact()) {
    const WgSpace& s = d.space();
    for (int i = 0; i < static_cast<int>(m.num_edges()); ++i) {
      const Edge& ed = m.edges[i];
      if (ed.tag != EdgeTag::Interface) continue;
      const QuadRule& r = s.edge_rules[i];
      for (std::size_t q = 0; q < r.size(); ++q) {
        const Vec2 psi = jump_data(pb, r.points[q], ed.unit_normal).traction;
        const Eigen::VectorXd v = r.weights[q] * s.edge_bases[i].values(r.points[q]).transpose() * psi;
        for (int j = 0; j < L.edge_block; ++j) sys.b[L.free_index[L.edge_offset[i] + j]] += v[j];
      }
    }
  }
  return sys;
}

/// Stiffness with no boundary conditions; interface blocks stay tied with a
/// zero jump. Its kernel is the global rigid motions.
inline SparseSpdSystem assemble_unconstrained(const Discretization& d, const PiecewiseCoefficient& coeff) {
  const DofLayout& L = d.layout();
  SparseSpdSystem sys;
  sys.total = L.total;
  sys.free_index.assign(L.total, -1);
  int n = 0;
  for (int g = 0; g < L.total; ++g)
    if (L.kind[g] != DofKind::InterfaceR) sys.free_index[g] = n++;
  for (int g = 0; g < L.total; ++g)
    if (L.kind[g] == DofKind::InterfaceR) {
      // the tied left dof sits at the same position in the edge's left block
      sys.free_index[g] = sys.free_index[g - L.edge_block];
    }
  sys.offset = Eigen::VectorXd::Zero(L.total);
  sys.b = Eigen::VectorXd::Zero(n);
  detail::assemble_matrix(d, coeff, sys, nullptr);
  return sys;
}

enum class SolverKind { Auto, Cholesky, CG };

struct SolveOptions {
  SolverKind kind = SolverKind::Auto;
  double cg_tolerance = 1e-12;
  int max_iterations = 0;  // 0: 10 * size
  const Eigen::VectorXd* initial_guess = nullptr;
};

struct SolveResult {
  Eigen::VectorXd x;     // free DOFs
  Eigen::VectorXd full;  // full layout including constrained DOFs
  double residual = 0.0;
  int iterations = 0;
  SolverKind used = SolverKind::Cholesky;
};

inline double residual_check(const SparseSpdSystem& sys, const Eigen::VectorXd& x) {
  return (sys.A * x - sys.b).norm() / std::max(sys.b.norm(), 1e-300);
}

inline SolveResult solve(const SparseSpdSystem& sys, const SolveOptions& opt = {}) {
  SolveResult res;
  const int n = sys.size();
  if (sys.b.norm() == 0.0) {
    res.x = Eigen::VectorXd::Zero(n);
  } else if (opt.kind == SolverKind::CG) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(opt.cg_tolerance);
    cg.setMaxIterations(opt.max_iterations > 0 ? opt.max_iterations : 10 * n);
    cg.compute(sys.A);
    res.x = opt.initial_guess ? Eigen::VectorXd(cg.solveWithGuess(sys.b, *opt.initial_guess)) : Eigen::VectorXd(cg.solve(sys.b));
    res.iterations = static_cast<int>(cg.iterations());
    res.used = SolverKind::CG;
  } else {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt(sys.A);
    if (llt.info() != Eigen::Success) throw std::runtime_error("solve: Cholesky failed, system is not positive definite");
    res.x = llt.solve(sys.b);
    res.used = SolverKind::Cholesky;
  }
  res.residual = residual_check(sys, res.x);
  if (!(res.residual <= 1e-10)) {
    std::ostringstream os;
    os << "solve: relative residual " << res.residual << " after " << res.iterations << " iterations exceeds 1e-10";
    throw std::runtime_error(os.str());
  }
  res.full = sys.reconstruct(res.x);
  return res;
}

}  // namespace wgelast
