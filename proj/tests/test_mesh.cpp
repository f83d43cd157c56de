#include <gtest/gtest.h>

#include <wgelast/mesh.hpp>

#include <cmath>
#include <sstream>

using namespace wgelast;

namespace {

double total_area(const PolyMesh& m) {
  double a = 0.0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) a += signed_area(m.polygon(static_cast<int>(e)));
  return a;
}

}  // namespace

TEST(Mesh, TypeAVerticalCounts) {
  const PolyMesh m = generate(GridFamily::A, 2, Layout::Vertical);
  ASSERT_EQ(m.num_elements(), 8u);
  int tri = 0, pent = 0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto p = m.polygon(static_cast<int>(e));
    if (p.size() == 3) ++tri;
    if (p.size() == 5) ++pent;
  }
  EXPECT_EQ(tri, 4);
  EXPECT_EQ(pent, 4);
  double len = 0.0;
  for (const auto& ed : m.edges)
    if (ed.tag == EdgeTag::Interface) {
      EXPECT_NEAR(ed.midpoint.x, 0.5, 1e-14);
      len += ed.length;
    }
  EXPECT_NEAR(len, 1.0, 1e-14);
}

TEST(Mesh, TypeAPentagonsHaveOneReflexVertex) {
  const PolyMesh m = generate(GridFamily::A, 4, Layout::Square);
  int pentagons = 0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto p = m.polygon(static_cast<int>(e));
    if (p.size() == 5) {
      ++pentagons;
      EXPECT_EQ(count_reflex(p), 1);
    } else {
      EXPECT_EQ(count_reflex(p), 0);
    }
  }
  EXPECT_EQ(pentagons, 16);
}

TEST(Mesh, TypeBHexagonsAreNonConvex) {
  const PolyMesh m = generate(GridFamily::B, 2, Layout::Vertical);
  ASSERT_EQ(m.num_elements(), 8u);
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto p = m.polygon(static_cast<int>(e));
    EXPECT_EQ(p.size(), 6u);
    EXPECT_GE(count_reflex(p), 1);
  }
}

TEST(Mesh, SquareLayoutNeedsMultipleOfFour) {
  EXPECT_THROW(generate(GridFamily::A, 2, Layout::Square), std::invalid_argument);
  EXPECT_THROW(generate(GridFamily::B, 6, Layout::Square), std::invalid_argument);
  EXPECT_THROW(generate(GridFamily::A, 3, Layout::Vertical), std::invalid_argument);
}

TEST(Mesh, AreasPartitionUnitSquare) {
  for (GridFamily f : {GridFamily::A, GridFamily::B}) {
    for (int n : {2, 4, 8}) EXPECT_NEAR(total_area(generate(f, n, Layout::Vertical)), 1.0, 1e-12);
    for (int n : {4, 8, 16}) EXPECT_NEAR(total_area(generate(f, n, Layout::Square)), 1.0, 1e-12);
  }
}

TEST(Mesh, InclusionBoundaryIsUnionOfEdges) {
  for (GridFamily f : {GridFamily::A, GridFamily::B}) {
    const PolyMesh m = generate(f, 4, Layout::Square);
    double len = 0.0;
    for (const auto& ed : m.edges) {
      const bool on = on_interface(m.vertices[ed.endpoint_ids[0]], Layout::Square) &&
                      on_interface(m.vertices[ed.endpoint_ids[1]], Layout::Square) && on_interface(ed.midpoint, Layout::Square);
      EXPECT_EQ(on, ed.tag == EdgeTag::Interface);
      if (ed.tag == EdgeTag::Interface) len += ed.length;
    }
    EXPECT_NEAR(len, 2.0, 1e-13);
  }
}

TEST(Mesh, SubdomainLabelsAndEdgeTopology) {
  for (GridFamily f : {GridFamily::A, GridFamily::B})
    for (Layout lay : {Layout::Vertical, Layout::Square}) {
      const PolyMesh m = generate(f, 8, lay);
      for (const auto& el : m.elements) EXPECT_EQ(el.subdomain, in_inclusion(el.centroid, lay) ? 0 : 1);
      for (const auto& ed : m.edges) {
        EXPECT_EQ(ed.tag == EdgeTag::Boundary, !ed.right_element.has_value());
        if (ed.tag == EdgeTag::Interface) {
          EXPECT_EQ(m.elements[ed.left_element].subdomain, 0);
          EXPECT_EQ(m.elements[*ed.right_element].subdomain, 1);
        }
      }
      // closed boundaries: sum of |e| n_e vanishes on every element
      for (std::size_t e = 0; e < m.num_elements(); ++e) {
        Point2 s{0, 0};
        for (const auto& ee : m.element_edges[e]) s = s + m.edges[ee.edge].length * m.outward_normal(ee);
        EXPECT_LT(norm(s), 1e-13);
      }
    }
}

TEST(Mesh, RefinementHalvesH) {
  for (GridFamily f : {GridFamily::A, GridFamily::B}) {
    const MeshFamily fam{f, Layout::Vertical, 0};
    for (int level = 1; level <= 3; ++level) {
      const double ratio = refine(fam, level + 1).h / refine(fam, level).h;
      EXPECT_GE(ratio, 0.49);
      EXPECT_LE(ratio, 0.51);
    }
  }
  EXPECT_EQ((MeshFamily{GridFamily::A, Layout::Vertical, 4}.cells_at(3)), 16);
  EXPECT_EQ(refine({GridFamily::A, Layout::Vertical, 4}, 3).cells_per_side, 16);
  EXPECT_THROW((MeshFamily{}.cells_at(0)), std::invalid_argument);
}

TEST(Mesh, Triangulation) {
  const std::vector<Point2> tri{{0, 0}, {1, 0}, {0, 1}};
  const auto t = triangulate(tri);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0], (std::array<int, 3>{0, 1, 2}));

  const PolyMesh a = generate(GridFamily::A, 2, Layout::Vertical);
  const PolyMesh b = generate(GridFamily::B, 2, Layout::Vertical);
  for (const PolyMesh* m : {&a, &b})
    for (std::size_t e = 0; e < m->num_elements(); ++e) {
      const auto p = m->polygon(static_cast<int>(e));
      const auto tris = triangulate(p);
      EXPECT_EQ(tris.size(), p.size() - 2);
      double area = 0.0;
      for (const auto& t3 : tris) {
        const std::vector<Point2> q{p[t3[0]], p[t3[1]], p[t3[2]]};
        EXPECT_GT(signed_area(q), 0.0);
        area += signed_area(q);
      }
      EXPECT_NEAR(area, signed_area(p), 1e-15);
    }
}

TEST(Mesh, VtkExport) {
  const PolyMesh m = generate(GridFamily::B, 2, Layout::Vertical);
  std::ostringstream os;
  write_vtk(m, os);
  EXPECT_NE(os.str().find("POLYGONS 8"), std::string::npos);
  EXPECT_NE(os.str().find("SCALARS subdomain"), std::string::npos);
}
