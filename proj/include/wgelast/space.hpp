#pragma once

// Weak finite element space: polynomial degrees per element, edge trace
// bases, quadrature strength, and the global DOF layout.

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "basis.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"

namespace wgelast {

/// Dense SPD solve for local mass/Gram systems: pivoted LDLT, full-pivot LU
/// when LDLT reports a non-positive pivot.
class GramSolver {
 public:
  GramSolver() = default;
  explicit GramSolver(const Eigen::MatrixXd& m) {
    ldlt_.compute(m);
    const auto d = ldlt_.vectorD();
    if (ldlt_.info() == Eigen::Success && d.size() > 0 && d.minCoeff() > 1e-14 * d.cwiseAbs().maxCoeff()) return;
    use_lu_ = true;
    lu_.compute(m);
    if (!lu_.isInvertible()) throw std::runtime_error("singular mass matrix (degenerate element?)");
  }

  template <class Rhs>
  Eigen::MatrixXd solve(const Eigen::MatrixBase<Rhs>& rhs) const {
    return use_lu_ ? Eigen::MatrixXd(lu_.solve(rhs)) : Eigen::MatrixXd(ldlt_.solve(rhs));
  }

 private:
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_;
  bool use_lu_ = false;
};

/// How the operator degree r1 = r2 is chosen on an element with N edges.
struct DegreePolicy {
  enum class Mode { Numerics, NumericsPlus, TheoryConvex, TheoryNonconvex, Fixed };
  Mode mode = Mode::Numerics;
  int fixed = 0;

  int degree(int k, int num_edges) const {
    int r = 0;
    switch (mode) {
      case Mode::Numerics: r = k + 1; break;
      case Mode::NumericsPlus: r = k + 2; break;
      case Mode::TheoryConvex: r = num_edges + k - 1; break;
      case Mode::TheoryNonconvex: r = 2 * num_edges + k - 1; break;
      case Mode::Fixed: r = fixed; break;
    }
    if (r < k || r < 1) throw std::invalid_argument("DegreePolicy: operator degree must satisfy r >= k and r >= 1");
    return r;
  }

  /// Default for the generated families. k + 1 leaves zero-energy modes
  /// beyond the rigid motions on both families (Type-A at k = 1 and 3,
  /// Type-B at every k), so both use k + 2.
  static DegreePolicy for_family(GridFamily) { return {Mode::NumericsPlus, 0}; }

  static DegreePolicy parse(const std::string& s) {
    if (s == "k+1" || s == "numerics") return {Mode::Numerics, 0};
    if (s == "k+2" || s == "numerics-plus") return {Mode::NumericsPlus, 0};
    if (s == "convex" || s == "N+k-1") return {Mode::TheoryConvex, 0};
    if (s == "nonconvex" || s == "2N+k-1") return {Mode::TheoryNonconvex, 0};
    if (!s.empty() && std::all_of(s.begin(), s.end(), ::isdigit)) return {Mode::Fixed, std::stoi(s)};
    throw std::invalid_argument("unknown degree policy '" + s + "'");
  }

  std::string name() const {
    switch (mode) {
      case Mode::Numerics: return "k+1";
      case Mode::NumericsPlus: return "k+2";
      case Mode::TheoryConvex: return "N+k-1";
      case Mode::TheoryNonconvex: return "2N+k-1";
      case Mode::Fixed: return std::to_string(fixed);
    }
    return "?";
  }
};

enum class DofKind { Free, Boundary, InterfaceR };

/// Global numbering: element interiors first (element-major, x-component
/// block then y-component block), then one trace block per edge; interface
/// edges carry a second block for the right (higher label) side.
struct DofLayout {
  int k = 1;
  int interior_block = 0;
  int edge_block = 0;
  std::vector<int> element_offset;
  std::vector<int> edge_offset;    // left-side block
  std::vector<int> edge_offset_r;  // right-side block, -1 unless Interface
  int total = 0;
  std::vector<DofKind> kind;
  std::vector<int> free_index;  // Free: own index; InterfaceR: index of the linked left dof; Boundary: -1
  int num_free = 0;

  int edge_block_for(const PolyMesh& m, int edge, int element) const {
    const Edge& ed = m.edges[edge];
    if (ed.tag == EdgeTag::Interface && element != ed.left_element) return edge_offset_r[edge];
    return edge_offset[edge];
  }

  /// Global indices of the local DOFs of `element`: interior block, then one
  /// block per edge in the element's boundary order.
  std::vector<int> local_to_global(const PolyMesh& m, int element) const {
    std::vector<int> g;
    g.reserve(interior_block + edge_block * m.element_edges[element].size());
    for (int i = 0; i < interior_block; ++i) g.push_back(element_offset[element] + i);
    for (const auto& ee : m.element_edges[element]) {
      const int off = edge_block_for(m, ee.edge, element);
      for (int i = 0; i < edge_block; ++i) g.push_back(off + i);
    }
    return g;
  }
};

inline DofLayout build_layout(const PolyMesh& m, int k, EdgeSpace space = EdgeSpace::Full) {
  if (k < 1) throw std::invalid_argument("build_layout: k must be >= 1");
  DofLayout L;
  L.k = k;
  L.interior_block = 2 * poly_dim(k);
  L.edge_block = edge_dimension(k, space);
  int next = 0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    L.element_offset.push_back(next);
    next += L.interior_block;
  }
  L.edge_offset.assign(m.num_edges(), -1);
  L.edge_offset_r.assign(m.num_edges(), -1);
  for (std::size_t i = 0; i < m.num_edges(); ++i) {
    L.edge_offset[i] = next;
    next += L.edge_block;
    if (m.edges[i].tag == EdgeTag::Interface) {
      L.edge_offset_r[i] = next;
      next += L.edge_block;
    }
  }
  L.total = next;
  L.kind.assign(L.total, DofKind::Free);
  for (std::size_t i = 0; i < m.num_edges(); ++i) {
    if (m.edges[i].tag == EdgeTag::Boundary)
      for (int j = 0; j < L.edge_block; ++j) L.kind[L.edge_offset[i] + j] = DofKind::Boundary;
    if (m.edges[i].tag == EdgeTag::Interface)
      for (int j = 0; j < L.edge_block; ++j) L.kind[L.edge_offset_r[i] + j] = DofKind::InterfaceR;
  }
  L.free_index.assign(L.total, -1);
  for (int g = 0; g < L.total; ++g)
    if (L.kind[g] == DofKind::Free) L.free_index[g] = L.num_free++;
  for (std::size_t i = 0; i < m.num_edges(); ++i)
    if (m.edges[i].tag == EdgeTag::Interface)
      for (int j = 0; j < L.edge_block; ++j) L.free_index[L.edge_offset_r[i] + j] = L.free_index[L.edge_offset[i] + j];
  return L;
}

/// Discrete space on a fixed mesh. Holds a pointer to the mesh, which must
/// outlive the space.
struct WgSpace {
  const PolyMesh* mesh = nullptr;
  int k = 1;
  EdgeSpace edge_space = EdgeSpace::Full;
  DegreePolicy policy;
  int data_degree = 0;  // highest polynomial degree of problem data to integrate exactly
  std::vector<int> r1, r2, quad_degree;
  std::vector<EdgeBasis> edge_bases;
  std::vector<QuadRule> edge_rules;
  DofLayout layout;

  int num_dofs() const { return layout.total; }
};

/// Element quadrature strength: mass matrices of P_r (2r), load and weak
/// images of degree-`data_degree` data (data + r), L2 errors (2 data).
inline int required_exactness(int k, int r, int data_degree) {
  return std::max({2 * std::max(r, k) + 2, data_degree + r + 1, 2 * data_degree});
}

inline WgSpace make_space(const PolyMesh& m, int k, DegreePolicy policy, int data_degree = 0,
                          EdgeSpace edge_space = EdgeSpace::Full) {
  WgSpace s;
  s.mesh = &m;
  s.k = k;
  s.policy = policy;
  s.data_degree = data_degree;
  s.edge_space = edge_space;
  s.layout = build_layout(m, k, edge_space);
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const int n = static_cast<int>(m.elements[e].vertex_ids.size());
    const int r = policy.degree(k, n);
    s.r1.push_back(r);
    s.r2.push_back(r);
    s.quad_degree.push_back(required_exactness(k, r, data_degree));
  }
  for (std::size_t i = 0; i < m.num_edges(); ++i) {
    const Edge& ed = m.edges[i];
    const Point2 a = m.vertices[ed.endpoint_ids[0]], b = m.vertices[ed.endpoint_ids[1]];
    s.edge_bases.emplace_back(a, b, k, edge_space);
    int q = s.quad_degree[ed.left_element];
    if (ed.right_element) q = std::max(q, s.quad_degree[*ed.right_element]);
    s.edge_rules.push_back(build_edge_quadrature(a, b, q));
  }
  return s;
}

}  // namespace wgelast
