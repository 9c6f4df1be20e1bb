#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace csur;
using csur::testing::rectangle;
using csur::testing::square_polygon;
using csur::testing::unit_square;

namespace {

void expect_same_polygon(const ConvexPolygon& a, const ConvexPolygon& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  // Same cyclic sequence, possibly starting at a different vertex.
  std::size_t shift = 0;
  for (; shift < b.size(); ++shift)
    if ((a.vertices[0] - b.vertices[shift]).norm() <= tol) break;
  ASSERT_LT(shift, b.size());
  for (std::size_t m = 0; m < a.size(); ++m) EXPECT_LE((a.vertices[m] - b.vertex(m + shift)).norm(), tol);
}

double signed_area(const ConvexPolygon& p) {
  double s = 0.0;
  for (std::size_t m = 0; m < p.size(); ++m) s += cross2(p.vertex(m), p.vertex(m + 1));
  return 0.5 * s;
}

}  // namespace

TEST(HalfplaneIntersect, AxisAlignedCut) {
  const ConvexPolygon out = halfplane_intersect(square_polygon(), Vec2(1, 0), 0.5);
  ConvexPolygon expected;
  expected.vertices = {{0, 0}, {0.5, 0}, {0.5, 1}, {0, 1}};
  expect_same_polygon(out, expected, 1e-15);
  EXPECT_GT(signed_area(out), 0.0);
}

TEST(HalfplaneIntersect, ContainingHalfplaneLeavesPolygon) {
  const ConvexPolygon out = halfplane_intersect(square_polygon(), Vec2(1, 0), 2.0);
  expect_same_polygon(out, square_polygon(), 0.0);
}

TEST(HalfplaneIntersect, ExcludingHalfplaneEmpties) {
  const ConvexPolygon out = halfplane_intersect(square_polygon(), Vec2(-1, 0), -2.0);
  EXPECT_TRUE(out.empty());
  EXPECT_TRUE(halfplane_intersect(out, Vec2(0, 1), 1.0).empty());
}

TEST(HalfplaneIntersect, TagsNewEdge) {
  const ConvexPolygon out = halfplane_intersect(square_polygon(), Vec2(1, 0), 0.5, 7);
  int tagged = 0;
  for (std::size_t m = 0; m < out.size(); ++m)
    if (out.edge_tags[m] == 7) {
      ++tagged;
      EXPECT_NEAR(out.vertices[m].x(), 0.5, 1e-15);
      EXPECT_NEAR(out.vertex(m + 1).x(), 0.5, 1e-15);
    }
  EXPECT_EQ(tagged, 1);
}

TEST(HalfplaneIntersect, Idempotent) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const ConvexPolygon poly = oracle::random_convex_polygon(rng);
    const double ang = uniform(rng, 0.0, 6.283185307179586);
    const Vec2 a(std::cos(ang), std::sin(ang));
    const double b = a.dot(vertex_mean(poly)) + uniform(rng, -1.0, 1.0);
    const ConvexPolygon once = halfplane_intersect(poly, a, b);
    const ConvexPolygon twice = halfplane_intersect(once, a, b);
    if (once.empty()) {
      EXPECT_TRUE(twice.empty());
      continue;
    }
    expect_same_polygon(twice, once, 1e-12);
  }
}

TEST(PolygonMoments, UnitSquare) {
  const Moments m = polygon_moments(square_polygon(), DensityField::uniform());
  EXPECT_DOUBLE_EQ(m.mass, 1.0);
  EXPECT_NEAR(m.centroid.x(), 0.5, 1e-15);
  EXPECT_NEAR(m.centroid.y(), 0.5, 1e-15);
}

TEST(PolygonMoments, Rectangle) {
  const Moments m = polygon_moments(rectangle(4.0, 2.8).polygon(), DensityField::uniform());
  EXPECT_NEAR(m.mass, 11.2, 1e-13);
  EXPECT_NEAR(m.centroid.x(), 2.0, 1e-14);
  EXPECT_NEAR(m.centroid.y(), 1.4, 1e-14);
}

TEST(PolygonMoments, Triangle) {
  ConvexPolygon tri;
  tri.vertices = {{0, 0}, {1, 0}, {0, 1}};
  tri.edge_tags.assign(3, kNoTag);
  const Moments m = polygon_moments(tri, DensityField::uniform());
  EXPECT_DOUBLE_EQ(m.mass, 0.5);
  EXPECT_NEAR(m.centroid.x(), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.centroid.y(), 1.0 / 3.0, 1e-15);
}

TEST(PolygonMoments, EmptyPolygonIsDegenerate) {
  try {
    polygon_moments(ConvexPolygon{}, DensityField::uniform());
    FAIL();
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateCell);
  }
}

TEST(PolygonMoments, UniformMatchesClosedFormAndMonteCarlo) {
  std::mt19937_64 rng(5);
  const DensityField phi = DensityField::uniform();
  for (int trial = 0; trial < 5; ++trial) {
    const ConvexPolygon poly = oracle::random_convex_polygon(rng);
    const Moments m = polygon_moments(poly, phi);
    const Moments fan = oracle::fan_moments(poly);
    EXPECT_NEAR(m.mass, fan.mass, 1e-12 * fan.mass);
    EXPECT_LE((m.centroid - fan.centroid).norm(), 1e-12 * poly.diameter());
    const Moments mc = oracle::monte_carlo_moments(poly, phi, 1'000'000, rng);
    EXPECT_NEAR(m.mass, mc.mass, 1e-2 * m.mass);
    EXPECT_LE((m.centroid - mc.centroid).norm(), 1e-2 * poly.diameter());
    EXPECT_TRUE(poly.contains(m.centroid));
  }
}

TEST(PolygonMoments, GaussianBumpMatchesMonteCarlo) {
  std::mt19937_64 rng(6);
  const DensityField phi = DensityField::gaussian_bump({1.0, 0.5}, 0.7, 0.1, 2.0);
  for (int trial = 0; trial < 3; ++trial) {
    const ConvexPolygon poly = oracle::random_convex_polygon(rng);
    const Moments m = polygon_moments(poly, phi);
    const Moments mc = oracle::monte_carlo_moments(poly, phi, 1'000'000, rng);
    EXPECT_NEAR(m.mass, mc.mass, 1e-2 * m.mass);
    EXPECT_LE((m.centroid - mc.centroid).norm(), 1e-2 * poly.diameter());
  }
}

TEST(PolygonMoments, ChordSplitIsAdditive) {
  std::mt19937_64 rng(7);
  const std::vector<DensityField> fields = {DensityField::uniform(1.3),
                                            DensityField::gaussian_bump({0.0, 0.0}, 2.0, 0.05)};
  for (const auto& phi : fields)
    for (int trial = 0; trial < 30; ++trial) {
      const ConvexPolygon poly = oracle::random_convex_polygon(rng);
      const double ang = uniform(rng, 0.0, 6.283185307179586);
      const Vec2 a(std::cos(ang), std::sin(ang));
      const double b = a.dot(vertex_mean(poly)) + uniform(rng, -0.3, 0.3);
      const ConvexPolygon left = halfplane_intersect(poly, a, b);
      const ConvexPolygon right = halfplane_intersect(poly, -a, -b);
      if (left.empty() || right.empty()) continue;
      const double total = polygon_moments(poly, phi).mass;
      const double parts = polygon_moments(left, phi).mass + polygon_moments(right, phi).mass;
      EXPECT_NEAR(parts, total, 1e-10 * total);
    }
}

TEST(PolarMoment, UnitSquareAboutCenter) {
  EXPECT_NEAR(polar_moment(square_polygon(), DensityField::uniform(), {0.5, 0.5}), 1.0 / 6.0, 1e-15);
}

TEST(PolarMoment, QuadratureAgreesWithClosedForm) {
  // A constant Gaussian floor with a negligible bump reproduces the uniform closed form
  // through the quadrature path.
  std::mt19937_64 rng(8);
  const DensityField flat = DensityField::gaussian_bump({1e6, 1e6}, 1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const ConvexPolygon poly = oracle::random_convex_polygon(rng);
    const Vec2 p(uniform(rng, -3, 3), uniform(rng, -3, 3));
    const double exact = polar_moment(poly, DensityField::uniform(), p);
    EXPECT_NEAR(polar_moment(poly, flat, p), exact, 1e-12 * exact);
    const Moments m = polygon_moments(poly, flat);
    const Moments fan = oracle::fan_moments(poly);
    EXPECT_NEAR(m.mass, fan.mass, 1e-12 * fan.mass);
    EXPECT_LE((m.centroid - fan.centroid).norm(), 1e-12 * poly.diameter());
  }
}

TEST(EdgeKernel, ZeroLengthSegment) {
  const EdgeKernel k = edge_kernel({{2, 1}, {2, 1}}, {1, 1}, {3, 1}, DensityField::uniform());
  EXPECT_EQ(k.D, Mat2::Zero());
  EXPECT_EQ(k.P, Vec2::Zero());
}

TEST(EdgeKernel, VerticalBisectorAnalytic) {
  const Segment seg{{2, 0}, {2, 2.8}};
  const EdgeKernel k = edge_kernel(seg, {1, 1}, {3, 1}, DensityField::uniform());
  EXPECT_NEAR(k.P.x(), 1.4, 1e-14);
  EXPECT_NEAR(k.P.y(), 0.56, 1e-14);
}

TEST(EdgeKernel, MatchesHighResolutionQuadrature) {
  const Segment seg{{2, 0}, {2, 2.8}};
  const EdgeKernel k = edge_kernel(seg, {1, 1}, {3, 1}, DensityField::uniform());
  const EdgeKernel ref = oracle::simpson_edge_kernel(seg, {1, 1}, {3, 1}, DensityField::uniform(), 10'000);
  EXPECT_LE((k.D - ref.D).norm(), 1e-10 * ref.D.norm());
  EXPECT_LE((k.P - ref.P).norm(), 1e-10 * ref.P.norm());

  const DensityField bump = DensityField::gaussian_bump({2.5, 1.0}, 0.8, 0.2);
  const EdgeKernel kb = edge_kernel(seg, {1, 1}, {3, 1}, bump);
  const EdgeKernel rb = oracle::simpson_edge_kernel(seg, {1, 1}, {3, 1}, bump, 10'000);
  EXPECT_LE((kb.D - rb.D).norm(), 1e-10 * rb.D.norm());
  EXPECT_LE((kb.P - rb.P).norm(), 1e-10 * rb.P.norm());
}

TEST(EdgeKernel, LinearInDensityScale) {
  const Segment seg{{2, 0}, {2, 2.8}};
  const DensityField bump = DensityField::gaussian_bump({2.5, 1.0}, 0.8, 0.2);
  const EdgeKernel k1 = edge_kernel(seg, {1, 1}, {3, 1}, bump);
  const EdgeKernel k3 = edge_kernel(seg, {1, 1}, {3, 1}, bump.scaled(3.0));
  EXPECT_LE((k3.D - 3.0 * k1.D).norm(), 1e-14 * k3.D.norm());
  EXPECT_LE((k3.P - 3.0 * k1.P).norm(), 1e-14 * k3.P.norm());
}

TEST(EdgeKernel, CoincidentAgents) {
  try {
    edge_kernel({{2, 0}, {2, 1}}, {1, 1}, {1, 1}, DensityField::uniform());
    FAIL();
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.code(), ErrorCode::CoincidentAgents);
  }
}

TEST(EdgeKernel, RejectsOffBisectorSegment) {
  EXPECT_THROW(edge_kernel({{2.1, 0}, {2.1, 1}}, {1, 1}, {3, 1}, DensityField::uniform()), CoverageError);
}

TEST(ConvexRegion, HalfplaneInvariants) {
  const ConvexRegion r = ConvexRegion::from_vertices({{10, 10}, {14, 10}, {14, 12.8}, {10, 12.8}});
  for (std::size_t j = 0; j < r.edge_count(); ++j) {
    EXPECT_NEAR(r.edges()[j].normal.norm(), 1.0, 1e-12);
    EXPECT_GT(r.edges()[j].offset, 0.0);
    // Every vertex lies on its two incident half-plane boundaries.
    EXPECT_NEAR(r.h(j, r.vertices()[j]), 0.0, 1e-12);
    EXPECT_NEAR(r.h(j, r.vertices()[(j + 1) % r.edge_count()]), 0.0, 1e-12);
  }
  EXPECT_TRUE(r.strictly_contains({12, 11}));
  EXPECT_FALSE(r.strictly_contains({14, 11}));
  EXPECT_NEAR(r.area(), 11.2, 1e-12);
}

TEST(ConvexRegion, ClockwiseInputIsReoriented) {
  const ConvexRegion r = ConvexRegion::from_vertices({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  EXPECT_NEAR(r.area(), 1.0, 1e-15);
  EXPECT_GT(signed_area(r.polygon()), 0.0);
}

TEST(ConvexRegion, RejectsConcaveInput) {
  try {
    ConvexRegion::from_vertices({{0, 0}, {2, 0}, {1, 0.5}, {2, 2}, {0, 2}});
    FAIL();
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonConvex);
    EXPECT_NE(std::string(e.what()).find("vertex 2"), std::string::npos);
  }
}

TEST(ShrinkRegion, RectangleOffset) {
  const ConvexRegion r = shrink_region(rectangle(4.0, 2.8), 0.1);
  ConvexPolygon expected;
  expected.vertices = {{0.1, 0.1}, {3.9, 0.1}, {3.9, 2.7}, {0.1, 2.7}};
  expect_same_polygon(r.polygon(), expected, 1e-14);
  EXPECT_NEAR(r.area(), 3.8 * 2.6, 1e-12);
  for (std::size_t j = 0; j < r.edge_count(); ++j)
    EXPECT_NEAR(r.edges()[j].offset, rectangle(4.0, 2.8).edges()[j].offset - 0.1, 1e-15);
}

TEST(ShrinkRegion, ZeroIsIdentity) {
  const ConvexRegion base = rectangle(4.0, 2.8);
  const ConvexRegion r = shrink_region(base, 0.0);
  expect_same_polygon(r.polygon(), base.polygon(), 0.0);
  for (std::size_t j = 0; j < r.edge_count(); ++j) EXPECT_EQ(r.edges()[j].offset, base.edges()[j].offset);
}

TEST(ShrinkRegion, BeyondInradiusIsEmpty) {
  try {
    shrink_region(unit_square(), 0.6);
    FAIL();
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyRegion);
  }
}
