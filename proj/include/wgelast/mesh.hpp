#pragma once

// Interface-fitted polygonal meshes of the unit square.
//
// Two grid families are provided. Both start from an n x n array of square
// cells and split every cell into two non-convex (or triangle + non-convex)
// pieces, so the resulting partitions exercise the polygonal machinery on
// elements that are neither convex nor star-shaped with respect to every
// vertex:
//
//  - family A: triangle (A,B,M) + pentagon (B,C,D,A,M), M = (1/2, 1/4) in
//    cell-local coordinates, reflex angle at M;
//  - family B: the cell is cut by the polyline E(1/2,0) - P1(3/10,1/3) -
//    P2(7/10,2/3) - F(1/2,1) into two hexagons with one reflex vertex each.
//
// Subdomain 0 is the inclusion (right half, or the centred square of side
// 1/2), subdomain 1 is its complement. Elements never straddle the interface.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace wgelast {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

/// Absolute tolerance for geometric coincidence on the unit square.
inline constexpr double kGeomTol = 1e-12;

enum class Layout { Vertical, Square };
enum class GridFamily { A, B };

/// Whether `p` lies in the inclusion subdomain (label 0) of `layout`.
inline bool in_inclusion(Point2 p, Layout layout) {
  if (layout == Layout::Vertical) return p.x > 0.5;
  return p.x > 0.25 && p.x < 0.75 && p.y > 0.25 && p.y < 0.75;
}

/// Whether `p` lies on the interface polyline of `layout` (within `tol`).
inline bool on_interface(Point2 p, Layout layout, double tol = 1e-10) {
  if (layout == Layout::Vertical) return std::abs(p.x - 0.5) <= tol && p.y >= -tol && p.y <= 1 + tol;
  const bool in_x = p.x >= 0.25 - tol && p.x <= 0.75 + tol;
  const bool in_y = p.y >= 0.25 - tol && p.y <= 0.75 + tol;
  const bool on_vert = (std::abs(p.x - 0.25) <= tol || std::abs(p.x - 0.75) <= tol) && in_y;
  const bool on_horz = (std::abs(p.y - 0.25) <= tol || std::abs(p.y - 0.75) <= tol) && in_x;
  return on_vert || on_horz;
}

inline double signed_area(std::span<const Point2> poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * a;
}

inline Point2 polygon_centroid(std::span<const Point2> poly) {
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 p = poly[i], q = poly[(i + 1) % poly.size()];
    const double c = cross(p, q);
    a += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  a *= 0.5;
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

inline double polygon_diameter(std::span<const Point2> poly) {
  double d = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j) d = std::max(d, norm(poly[i] - poly[j]));
  return d;
}

/// Interior angle at every vertex of a counter-clockwise polygon, in (0, 2pi).
inline std::vector<double> interior_angles(std::span<const Point2> poly) {
  const std::size_t n = poly.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 prev = poly[(i + n - 1) % n], cur = poly[i], next = poly[(i + 1) % n];
    const Point2 a = prev - cur, b = next - cur;
    // angle swept counter-clockwise from (next - cur) to (prev - cur)
    double ang = std::atan2(cross(b, a), dot(b, a));
    if (ang < 0) ang += 2.0 * M_PI;
    out[i] = ang;
  }
  return out;
}

inline int count_reflex(std::span<const Point2> poly) {
  int c = 0;
  for (double a : interior_angles(poly))
    if (a > M_PI + 1e-12) ++c;
  return c;
}

namespace detail {

inline bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
  auto orient = [](Point2 a, Point2 b, Point2 c) {
    const double v = cross(b - a, c - a);
    return (v > kGeomTol) - (v < -kGeomTol);
  };
  auto on_seg = [](Point2 a, Point2 b, Point2 c) {
    return std::min(a.x, b.x) - kGeomTol <= c.x && c.x <= std::max(a.x, b.x) + kGeomTol &&
           std::min(a.y, b.y) - kGeomTol <= c.y && c.y <= std::max(a.y, b.y) + kGeomTol;
  };
  const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4 && o1 * o2 <= 0 && o3 * o4 <= 0 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0)
    return true;
  if (o1 == 0 && on_seg(p1, p2, q1)) return true;
  if (o2 == 0 && on_seg(p1, p2, q2)) return true;
  if (o3 == 0 && on_seg(q1, q2, p1)) return true;
  if (o4 == 0 && on_seg(q1, q2, p2)) return true;
  return false;
}

inline bool point_in_triangle(Point2 p, Point2 a, Point2 b, Point2 c) {
  const double d1 = cross(b - a, p - a), d2 = cross(c - b, p - b), d3 = cross(a - c, p - c);
  return d1 >= -kGeomTol && d2 >= -kGeomTol && d3 >= -kGeomTol;
}

}  // namespace detail

/// True if no two non-adjacent edges of the closed loop touch.
inline bool is_simple_polygon(std::span<const Point2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (detail::segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

/// Ear-clipping triangulation of a simple polygon (either orientation).
/// Returns index triples into `poly`, each counter-clockwise.
inline std::vector<std::array<int, 3>> triangulate(std::span<const Point2> poly) {
  if (!is_simple_polygon(poly)) throw std::invalid_argument("triangulate: polygon is not simple");
  const int n = static_cast<int>(poly.size());
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  if (signed_area(poly) < 0) std::reverse(idx.begin(), idx.end());

  std::vector<std::array<int, 3>> tris;
  tris.reserve(n - 2);
  while (idx.size() > 3) {
    const int m = static_cast<int>(idx.size());
    int best = -1;
    double best_quality = -1.0;
    for (int i = 0; i < m; ++i) {
      const int ia = idx[(i + m - 1) % m], ib = idx[i], ic = idx[(i + 1) % m];
      const Point2 a = poly[ia], b = poly[ib], c = poly[ic];
      const double area2 = cross(b - a, c - a);
      if (area2 <= kGeomTol) continue;  // reflex or degenerate corner
      bool contains = false;
      for (int j = 0; j < m && !contains; ++j) {
        const int v = idx[j];
        if (v == ia || v == ib || v == ic) continue;
        contains = detail::point_in_triangle(poly[v], a, b, c);
      }
      if (contains) continue;
      // prefer well-shaped ears: area over squared longest side
      const double l = std::max({norm(b - a), norm(c - b), norm(a - c)});
      const double q = area2 / (l * l);
      if (q > best_quality) {
        best_quality = q;
        best = i;
      }
    }
    if (best < 0) throw std::runtime_error("triangulate: no ear found (degenerate polygon)");
    tris.push_back({idx[(best + m - 1) % m], idx[best], idx[(best + 1) % m]});
    idx.erase(idx.begin() + best);
  }
  tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

struct Element {
  std::vector<int> vertex_ids;  // counter-clockwise loop
  int subdomain = 1;
  double diameter = 0.0;
  double area = 0.0;
  Point2 centroid;
};

enum class EdgeTag { Interior, Boundary, Interface };

struct Edge {
  std::array<int, 2> endpoint_ids{};
  int left_element = -1;
  std::optional<int> right_element;
  EdgeTag tag = EdgeTag::Interior;
  int interface_id = -1;  // >= 0 only for Interface edges
  double length = 0.0;
  Point2 unit_normal;  // outward from left_element
  Point2 midpoint;
};

struct ElementEdge {
  int edge = -1;
  int sign = 1;  // +1 if the element is the edge's left element
};

class PolyMesh {
 public:
  std::vector<Point2> vertices;
  std::vector<Element> elements;
  std::vector<Edge> edges;
  std::vector<std::vector<ElementEdge>> element_edges;  // ordered as the vertex loop
  double h = 0.0;
  Layout layout = Layout::Vertical;
  GridFamily family = GridFamily::A;
  int cells_per_side = 0;

  std::vector<Point2> polygon(int element) const {
    std::vector<Point2> p;
    p.reserve(elements[element].vertex_ids.size());
    for (int v : elements[element].vertex_ids) p.push_back(vertices[v]);
    return p;
  }

  /// Outward unit normal of edge `ee` seen from its element.
  Point2 outward_normal(const ElementEdge& ee) const { return double(ee.sign) * edges[ee.edge].unit_normal; }

  std::size_t num_elements() const { return elements.size(); }
  std::size_t num_edges() const { return edges.size(); }
};

namespace detail {

class MeshBuilder {
 public:
  explicit MeshBuilder(Layout layout) { mesh_.layout = layout; }

  int vertex(Point2 p) {
    constexpr double grid = 1e-10;
    const auto key = std::make_pair(std::llround(p.x / grid), std::llround(p.y / grid));
    auto [it, inserted] = lookup_.try_emplace(key, static_cast<int>(mesh_.vertices.size()));
    if (inserted) mesh_.vertices.push_back(p);
    return it->second;
  }

  void element(std::span<const Point2> loop) {
    Element el;
    for (const Point2& p : loop) el.vertex_ids.push_back(vertex(p));
    el.area = signed_area(loop);
    if (el.area <= 0) throw std::logic_error("mesh builder: element loop is not counter-clockwise");
    el.centroid = polygon_centroid(loop);
    el.diameter = polygon_diameter(loop);
    el.subdomain = in_inclusion(el.centroid, mesh_.layout) ? 0 : 1;
    mesh_.elements.push_back(std::move(el));
  }

  PolyMesh finish() {
    auto& m = mesh_;
    std::map<std::pair<int, int>, int> edge_of;
    m.element_edges.assign(m.elements.size(), {});
    for (int e = 0; e < static_cast<int>(m.elements.size()); ++e) {
      const auto& ids = m.elements[e].vertex_ids;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const int a = ids[i], b = ids[(i + 1) % ids.size()];
        const auto key = std::minmax(a, b);
        auto it = edge_of.find(key);
        if (it == edge_of.end()) {
          Edge ed;
          ed.endpoint_ids = {a, b};
          ed.left_element = e;
          const Point2 pa = m.vertices[a], pb = m.vertices[b];
          ed.length = norm(pb - pa);
          ed.midpoint = 0.5 * (pa + pb);
          ed.unit_normal = {(pb.y - pa.y) / ed.length, -(pb.x - pa.x) / ed.length};
          edge_of.emplace(key, static_cast<int>(m.edges.size()));
          m.element_edges[e].push_back({static_cast<int>(m.edges.size()), +1});
          m.edges.push_back(ed);
        } else {
          Edge& ed = m.edges[it->second];
          if (ed.right_element) throw std::logic_error("mesh builder: edge shared by more than two elements");
          if (ed.endpoint_ids[0] != b || ed.endpoint_ids[1] != a)
            throw std::logic_error("mesh builder: inconsistent orientation on shared edge");
          ed.right_element = e;
          m.element_edges[e].push_back({it->second, -1});
        }
      }
    }
    for (int i = 0; i < static_cast<int>(m.edges.size()); ++i) {
      Edge& ed = m.edges[i];
      if (!ed.right_element) {
        ed.tag = EdgeTag::Boundary;
        continue;
      }
      const int sl = m.elements[ed.left_element].subdomain, sr = m.elements[*ed.right_element].subdomain;
      if (sl == sr) continue;
      ed.tag = EdgeTag::Interface;
      ed.interface_id = 0;
      if (sl > sr) {
        // the lower subdomain label owns the left side of interface edges
        flip(i);
      }
    }
    m.h = 0.0;
    for (const auto& el : m.elements) m.h = std::max(m.h, el.diameter);
    return std::move(m);
  }

 private:
  void flip(int i) {
    Edge& ed = mesh_.edges[i];
    const int l = ed.left_element, r = *ed.right_element;
    std::swap(ed.endpoint_ids[0], ed.endpoint_ids[1]);
    ed.left_element = r;
    ed.right_element = l;
    ed.unit_normal = -1.0 * ed.unit_normal;
    for (auto& ee : mesh_.element_edges[l])
      if (ee.edge == i) ee.sign = -1;
    for (auto& ee : mesh_.element_edges[r])
      if (ee.edge == i) ee.sign = +1;
  }

  PolyMesh mesh_;
  std::map<std::pair<long long, long long>, int> lookup_;
};

inline void check_cells(int n, Layout layout) {
  if (n <= 0) throw std::invalid_argument("grid: n must be positive");
  if (layout == Layout::Vertical && n % 2 != 0)
    throw std::invalid_argument("grid: vertical layout needs n even so that x = 1/2 is a grid line");
  if (layout == Layout::Square && n % 4 != 0)
    throw std::invalid_argument("grid: square layout needs n divisible by 4");
}

template <class SplitCell>
PolyMesh build_grid(int n, Layout layout, GridFamily family, SplitCell split) {
  check_cells(n, layout);
  MeshBuilder b(layout);
  const double s = 1.0 / n;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      auto at = [&](double lx, double ly) { return Point2{(i + lx) * s, (j + ly) * s}; };
      split(b, at);
    }
  }
  PolyMesh m = b.finish();
  m.family = family;
  m.cells_per_side = n;
  return m;
}

}  // namespace detail

/// Family A grid: n x n cells, each split into a triangle and a pentagon.
inline PolyMesh generate_type_a(int n, Layout layout) {
  return detail::build_grid(n, layout, GridFamily::A, [](detail::MeshBuilder& b, auto at) {
    const Point2 A = at(0, 0), B = at(1, 0), C = at(1, 1), D = at(0, 1), M = at(0.5, 0.25);
    const std::array tri{A, B, M};
    const std::array pent{B, C, D, A, M};
    b.element(tri);
    b.element(pent);
  });
}

/// Family B grid: n x n cells, each split into two non-convex hexagons.
inline PolyMesh generate_type_b(int n, Layout layout) {
  return detail::build_grid(n, layout, GridFamily::B, [](detail::MeshBuilder& b, auto at) {
    const Point2 A = at(0, 0), B = at(1, 0), C = at(1, 1), D = at(0, 1);
    const Point2 E = at(0.5, 0), P1 = at(0.3, 1.0 / 3.0), P2 = at(0.7, 2.0 / 3.0), F = at(0.5, 1);
    const std::array left{A, E, P1, P2, F, D};
    const std::array right{E, B, C, F, P2, P1};
    b.element(left);
    b.element(right);
  });
}

struct MeshFamily {
  GridFamily family = GridFamily::A;
  Layout layout = Layout::Vertical;
  int n0 = 0;  // cells per side at level 1; 0 picks the smallest admissible value

  int coarsest() const { return n0 > 0 ? n0 : (layout == Layout::Vertical ? 2 : 4); }
  int cells_at(int level) const {
    if (level < 1) throw std::invalid_argument("refine: level must be >= 1");
    return coarsest() << (level - 1);
  }
};

inline PolyMesh generate(GridFamily family, int n, Layout layout) {
  return family == GridFamily::A ? generate_type_a(n, layout) : generate_type_b(n, layout);
}

/// Member `level` (1-based) of a uniformly refined family: n = n0 * 2^(level-1).
inline PolyMesh refine(const MeshFamily& fam, int level) { return generate(fam.family, fam.cells_at(level), fam.layout); }

/// h_T over the largest inradius among the ear-clipping triangles of T, maximised over elements.
inline double shape_regularity(const PolyMesh& m) {
  double worst = 0.0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto poly = m.polygon(static_cast<int>(e));
    double rho = 0.0;
    for (const auto& t : triangulate(poly)) {
      const Point2 a = poly[t[0]], b = poly[t[1]], c = poly[t[2]];
      const double per = norm(b - a) + norm(c - b) + norm(a - c);
      rho = std::max(rho, std::abs(cross(b - a, c - a)) / per);
    }
    worst = std::max(worst, m.elements[e].diameter / rho);
  }
  return worst;
}

/// Legacy-VTK ASCII polygon export with the subdomain label as cell data.
inline void write_vtk(const PolyMesh& m, std::ostream& os) {
  os << "# vtk DataFile Version 3.0\nwgelast polygonal mesh\nASCII\nDATASET POLYDATA\n";
  os << "POINTS " << m.vertices.size() << " double\n";
  os.precision(17);
  for (const auto& p : m.vertices) os << p.x << ' ' << p.y << " 0\n";
  std::size_t total = 0;
  for (const auto& el : m.elements) total += el.vertex_ids.size() + 1;
  os << "POLYGONS " << m.elements.size() << ' ' << total << '\n';
  for (const auto& el : m.elements) {
    os << el.vertex_ids.size();
    for (int v : el.vertex_ids) os << ' ' << v;
    os << '\n';
  }
  os << "CELL_DATA " << m.elements.size() << "\nSCALARS subdomain int 1\nLOOKUP_TABLE default\n";
  for (const auto& el : m.elements) os << el.subdomain << '\n';
}

}  // namespace wgelast
