#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "vrucp/errors.hpp"
#include "vrucp/geometry.hpp"

using namespace vrucp;
using namespace vrucp::geometry;
using doctest::Approx;

namespace {

std::vector<Point2D> random_points(std::mt19937_64& rng, std::size_t n, double span = 1.0) {
  std::uniform_real_distribution<double> u(0.0, span);
  std::vector<Point2D> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

std::vector<Point2D> random_footprint_cluster(std::mt19937_64& rng, std::size_t members) {
  std::uniform_real_distribution<double> pos(0.0, 3.0);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  std::vector<Point2D> pts;
  for (std::size_t i = 0; i < members; ++i) {
    const auto c = footprint_corners(Point2D{pos(rng), pos(rng)}, ang(rng), FootprintDims{});
    pts.insert(pts.end(), c.begin(), c.end());
  }
  return pts;
}

bool has_corner(const std::array<Point2D, 4>& corners, Point2D want) {
  return std::any_of(corners.begin(), corners.end(), [&](Point2D c) {
    return std::abs(c.x - want.x) < 1e-12 && std::abs(c.y - want.y) < 1e-12;
  });
}

}  // namespace

TEST_CASE("footprint corners follow heading and position") {
  const FootprintDims dims{0.5, 0.3};
  const auto base = footprint_corners(Point2D{0, 0}, 0.0, dims);
  for (Point2D want : {Point2D{0.15, 0.25}, Point2D{-0.15, 0.25}, Point2D{-0.15, -0.25},
                       Point2D{0.15, -0.25}}) {
    CHECK(has_corner(base, want));
  }

  const auto turned = footprint_corners(Point2D{0, 0}, std::numbers::pi / 2, dims);
  for (Point2D want : {Point2D{0.25, 0.15}, Point2D{-0.25, 0.15}, Point2D{-0.25, -0.15},
                       Point2D{0.25, -0.15}}) {
    CHECK(has_corner(turned, want));
  }

  const auto moved = footprint_corners(Point2D{3, 4}, 0.0, dims);
  for (const auto& c : base) CHECK(has_corner(moved, c + Point2D{3, 4}));

  VruState s;
  s.position = {1.0, -2.0};
  s.heading = 0.7;
  const auto via_state = footprint_corners(s, dims);
  Polygon quad{{via_state.begin(), via_state.end()}};
  CHECK(std::abs(quad.signed_area()) == Approx(0.5 * 0.3).epsilon(1e-12));
}

TEST_CASE("footprint corners reject bad input") {
  CHECK_THROWS_AS(footprint_corners(Point2D{NAN, 0}, 0.0, {}), InvalidInputError);
  CHECK_THROWS_AS(footprint_corners(Point2D{0, 0}, INFINITY, {}), InvalidInputError);
  CHECK_THROWS_AS(footprint_corners(Point2D{0, 0}, 0.0, {0.0, 0.3}), InvalidInputError);
}

TEST_CASE("convex hull of square with interior point") {
  const std::vector<Point2D> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const Polygon hull = convex_hull(pts);
  REQUIRE(hull.vertices.size() == 4);
  CHECK(hull.signed_area() == Approx(1.0));
  CHECK(std::find(hull.vertices.begin(), hull.vertices.end(), Point2D{0.5, 0.5}) ==
        hull.vertices.end());
}

TEST_CASE("convex hull drops collinear boundary points and duplicates") {
  const std::vector<Point2D> pts{{0, 0}, {0.5, 0}, {1, 0}, {1, 1}, {0, 1}, {1, 1}, {0, 0.5}};
  const Polygon hull = convex_hull(pts);
  CHECK(hull.vertices.size() == 4);
}

TEST_CASE("convex hull of one footprint is that rectangle") {
  const auto c = footprint_corners(Point2D{2, 1}, 0.4, {});
  const Polygon hull = convex_hull(std::vector<Point2D>(c.begin(), c.end()));
  REQUIRE(hull.vertices.size() == 4);
  CHECK(hull.signed_area() == Approx(0.15).epsilon(1e-12));
  for (const auto& v : hull.vertices) CHECK(has_corner(c, v));
}

TEST_CASE("convex hull degenerate input") {
  CHECK_THROWS_AS(convex_hull(std::vector<Point2D>{{0, 0}, {1, 1}}), DegenerateInputError);
  CHECK_THROWS_AS(convex_hull(std::vector<Point2D>{{0, 0}, {1, 1}, {2, 2}, {3, 3}}),
                  DegenerateInputError);
  CHECK_THROWS_AS(convex_hull(std::vector<Point2D>{{0, 0}, {1, 1}, {NAN, 2}}), InvalidInputError);
}

TEST_CASE("convex hull matches the sidedness oracle on random points") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = random_points(rng, 50);
    const Polygon hull = convex_hull(pts);
    auto got = hull.vertices;
    std::sort(got.begin(), got.end());
    CHECK(got == oracle::naive_hull_vertices(pts));
    // CCW and strictly convex.
    const auto& v = hull.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(orientation(v[i], v[(i + 1) % v.size()], v[(i + 2) % v.size()]) == 1);
    }
  }
}

TEST_CASE("orientation is exact near degeneracy") {
  // Classic near-collinear configuration where naive evaluation errs.
  const Point2D a{0.5, 0.5};
  const Point2D b{12.0, 12.0};
  const Point2D c{24.0, 24.0};
  CHECK(orientation(a, b, c) == 0);
  const Point2D nudged{0.5 + std::ldexp(1.0, -53), 0.5};
  CHECK(orientation(nudged, b, c) == oracle::exact_side(nudged, b, c));
}

TEST_CASE("minimum enclosing circle small cases") {
  const Circle one = min_enclosing_circle(std::vector<Point2D>{{2, 3}});
  CHECK(one.center == Point2D{2, 3});
  CHECK(one.radius == 0.0);

  const Circle two = min_enclosing_circle(std::vector<Point2D>{{0, 0}, {3, 4}});
  CHECK(two.center.x == Approx(1.5));
  CHECK(two.center.y == Approx(2.0));
  CHECK(two.radius == Approx(2.5));

  CHECK_THROWS_AS(min_enclosing_circle(std::vector<Point2D>{}), InvalidInputError);
}

TEST_CASE("minimum enclosing circle matches brute-force support sets") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(1, 10);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pts = random_points(rng, static_cast<std::size_t>(size(rng)), 10.0);
    const Circle c = min_enclosing_circle(pts, static_cast<std::uint64_t>(trial));
    const auto ref = oracle::brute_force_circle(pts);
    CHECK(std::abs(c.radius - ref.radius) <= 1e-9);
    for (const auto& p : pts) CHECK(contains(c, p));
  }
}

TEST_CASE("minimum enclosing circle is reproducible for a fixed seed") {
  std::mt19937_64 rng(3);
  const auto pts = random_points(rng, 40);
  const Circle a = min_enclosing_circle(pts, 11);
  const Circle b = min_enclosing_circle(pts, 11);
  CHECK(a.center == b.center);
  CHECK(a.radius == b.radius);
}

TEST_CASE("ellipse of a square is its circumcircle") {
  const std::vector<Point2D> square{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  const double tol = kDefaultEllipseTolerance;
  const Ellipse e = min_enclosing_ellipse(square, tol);
  CHECK(std::abs(e.semi_major - std::sqrt(2.0)) <= tol * std::sqrt(2.0));
  CHECK(std::abs(e.semi_minor - std::sqrt(2.0)) <= tol * std::sqrt(2.0));
  CHECK(std::abs(e.center.x) < 1e-12);
  CHECK(std::abs(e.center.y) < 1e-12);
}

TEST_CASE("ellipse of points on a circle") {
  const double r = 2.5;
  std::vector<Point2D> pts;
  for (int k = 0; k < 17; ++k) {
    const double t = 2 * std::numbers::pi * k / 17;
    pts.push_back({3 + r * std::cos(t), -1 + r * std::sin(t)});
  }
  const double tol = kDefaultEllipseTolerance;
  const Ellipse e = min_enclosing_ellipse(pts, tol);
  CHECK(std::abs(e.semi_major - r) <= 2 * tol * r);
  CHECK(std::abs(e.semi_minor - r) <= 2 * tol * r);
}

TEST_CASE("ellipse encloses and dominates hull area on random instances") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(3, 40);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pts = random_points(rng, static_cast<std::size_t>(size(rng)));
    const Ellipse e = min_enclosing_ellipse(pts);
    CHECK(e.semi_major >= e.semi_minor);
    CHECK(e.semi_minor > 0.0);
    for (const auto& p : pts) CHECK(contains(e, p));
    CHECK(area(e) >= area(convex_hull(pts)));
  }
}

TEST_CASE("ellipse errors") {
  CHECK_THROWS_AS(min_enclosing_ellipse(std::vector<Point2D>{{0, 0}, {1, 1}, {2, 2}}),
                  DegenerateInputError);
  CHECK_THROWS_AS(min_enclosing_ellipse(std::vector<Point2D>{{0, 0}, {1, 0}, {0, 1}}, 0.0),
                  InvalidInputError);
  CHECK_THROWS_AS(min_enclosing_ellipse(std::vector<Point2D>{{0, 0}, {1, 0}, {0, 1}}, 1.0),
                  InvalidInputError);
  CHECK(ellipse_iteration_cap(10, 1e-4) > 0);
}

TEST_CASE("minimum area rectangle of an axis-aligned rectangle") {
  const std::vector<Point2D> pts{{0, 0}, {2, 0}, {2, 1}, {0, 1}};
  const OrientedRect r = min_area_rect(pts);
  CHECK(area(r) == Approx(2.0).epsilon(1e-12));
  CHECK(r.half_len == Approx(1.0));
  CHECK(r.half_wid == Approx(0.5));
  CHECK(r.center.x == Approx(1.0));
  CHECK(r.center.y == Approx(0.5));

  std::vector<Point2D> rotated;
  for (const auto& p : pts) rotated.push_back(rotate(p, std::numbers::pi / 6));
  CHECK(std::abs(area(min_area_rect(rotated)) - 2.0) <= 1e-9);
}

TEST_CASE("minimum area rectangle against the angle sweep") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(3, 30);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = random_points(rng, static_cast<std::size_t>(size(rng)));
    const OrientedRect r = min_area_rect(pts);
    CHECK(area(r) <= oracle::angle_sweep_min_box_area(pts) + 1e-9);
    CHECK(area(r) <= oracle::aabb_area(pts) + 1e-12);
    CHECK(r.half_len >= r.half_wid);
    CHECK(r.orientation >= 0.0);
    CHECK(r.orientation < std::numbers::pi);
    for (const auto& p : pts) CHECK(contains(r, p));

    // One side lies on a hull edge: some hull edge direction is parallel to a
    // rectangle axis and that edge touches the rectangle boundary.
    const auto hull = convex_hull(pts).vertices;
    bool flush = false;
    for (std::size_t i = 0; i < hull.size() && !flush; ++i) {
      const Point2D a = hull[i];
      const Point2D b = hull[(i + 1) % hull.size()];
      const Point2D la = rotate(a - r.center, -r.orientation);
      const Point2D lb = rotate(b - r.center, -r.orientation);
      flush = (std::abs(la.y - lb.y) < 1e-9 && std::abs(std::abs(la.y) - r.half_wid) < 1e-9) ||
              (std::abs(la.x - lb.x) < 1e-9 && std::abs(std::abs(la.x) - r.half_len) < 1e-9);
    }
    CHECK(flush);
  }
}

TEST_CASE("minimum area rectangle degenerate input") {
  CHECK_THROWS_AS(min_area_rect(std::vector<Point2D>{{0, 0}, {1, 0}, {2, 0}}), DegenerateInputError);
}

TEST_CASE("containment boundary cases") {
  CHECK(contains(Circle{{0, 0}, 1.0}, {0, 1}));
  CHECK_FALSE(contains(Circle{{0, 0}, 1.0}, {0, 1.001}));

  const Polygon unit{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  CHECK_FALSE(contains(unit, {2, 2}));
  CHECK(contains(unit, {1, 0.5}));
  CHECK(contains(unit, {1 + 5e-10, 0.5}));
  CHECK_FALSE(contains(unit, {1 + 5e-9, 0.5}));

  const Ellipse e{{0, 0}, 2.0, 1.0, 0.0};
  CHECK(contains(e, {1.9, 0}));
  CHECK_FALSE(contains(e, {0, 1.1}));
  CHECK(contains(e, {2.0 + 5e-10, 0}));
  CHECK_FALSE(contains(e, {2.0 + 5e-9, 0}));
  // Near the boundary in a generic direction: the exact distance decides.
  const double t = 0.8;
  const Point2D on{2 * std::cos(t), std::sin(t)};
  const Point2D normal{std::cos(t) / 2, std::sin(t)};
  const Point2D n = (1.0 / norm(normal)) * normal;
  CHECK(contains(e, on + 0.9e-9 * n));
  CHECK_FALSE(contains(e, on + 1.5e-9 * n));

  const OrientedRect r{{0, 0}, 1.0, 0.5, std::numbers::pi / 2};
  CHECK(contains(r, {0.5, 1.0}));
  CHECK_FALSE(contains(r, {1.0, 0.5}));
}

TEST_CASE("areas") {
  CHECK(area(Circle{{0, 0}, 2.0}) == Approx(4 * std::numbers::pi));
  CHECK(area(Polygon{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}) == Approx(1.0));
  CHECK(area(Ellipse{{0, 0}, 3.0, 1.0, 0.3}) == Approx(3 * std::numbers::pi));
  CHECK(area(OrientedRect{{5, 5}, 1.5, 0.5, 1.0}) == Approx(3.0));
}

TEST_CASE("centroids") {
  CHECK(centroid(Polygon{{{0, 0}, {2, 0}, {2, 2}, {0, 2}}}) == Point2D{1, 1});
  const Point2D tri = centroid(Polygon{{{0, 0}, {3, 0}, {0, 3}}});
  CHECK(tri.x == Approx(1.0));
  CHECK(tri.y == Approx(1.0));
}

TEST_CASE("footprint intersection predicate") {
  const auto fp = footprint_corners(Point2D{1.2, 0}, 0.0, {});  // x in [1.05, 1.35]
  CHECK(intersects(Circle{{0, 0}, 1.1}, fp));
  CHECK_FALSE(intersects(Circle{{0, 0}, 1.0}, fp));
  CHECK(intersects(Ellipse{{0, 0}, 1.1, 0.2, 0.0}, fp));
  CHECK_FALSE(intersects(Ellipse{{0, 0}, 1.1, 0.2, std::numbers::pi / 2}, fp));
  CHECK(intersects(OrientedRect{{0, 0}, 1.1, 0.1, 0.0}, fp));
  CHECK_FALSE(intersects(OrientedRect{{0, 0}, 1.0, 0.1, 0.0}, fp));
  CHECK(intersects(Polygon{{{0, -1}, {1.05, -1}, {1.05, 1}, {0, 1}}}, fp));
  CHECK_FALSE(intersects(Polygon{{{0, -1}, {1.0, -1}, {1.0, 1}, {0, 1}}}, fp));
}

TEST_CASE("fitted shapes contain their points and dominate the hull area") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> members(2, 8);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pts = random_footprint_cluster(rng, static_cast<std::size_t>(members(rng)));
    const double hull_area = area(convex_hull(pts));
    for (auto kind : kAllShapeKinds) {
      const FitResult fit = fit_shape(kind, pts, 1);
      CHECK_FALSE(fit.degenerate_fallback);
      CHECK(kind_of(fit.shape) == kind);
      for (const auto& p : pts) CHECK(contains(fit.shape, p));
      CHECK(area(fit.shape) >= hull_area - 1e-12);
    }
  }
}

TEST_CASE("fitted shapes are equivariant under rigid motions") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> shift(-100.0, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pts = random_footprint_cluster(rng, 4);
    const double a = angle(rng);
    const Point2D t{shift(rng), shift(rng)};
    std::vector<Point2D> moved;
    for (const auto& p : pts) moved.push_back(rotate(p, a) + t);
    for (auto kind : kAllShapeKinds) {
      const auto before = fit_shape(kind, pts, 3).shape;
      const auto after = fit_shape(kind, moved, 3).shape;
      CHECK(std::abs(area(after) - area(before)) <= 1e-7 * area(before));
      const Point2D expect = rotate(centroid(before), a) + t;
      CHECK(distance(centroid(after), expect) <= 1e-6);
    }
  }
}

TEST_CASE("collinear inputs fall back to a jittered fit and say so") {
  const std::vector<Point2D> line{{0, 0}, {1, 1}, {2, 2}};
  for (auto kind : {ShapeKind::kEllipse, ShapeKind::kRectangle, ShapeKind::kPolygon}) {
    const FitResult fit = fit_shape(kind, line);
    CHECK(fit.degenerate_fallback);
    for (const auto& p : line) CHECK(contains(fit.shape, p));
  }
  const FitResult rect = fit_shape(ShapeKind::kRectangle, std::vector<Point2D>{{0, 0}, {3, 0}});
  CHECK(area(rect.shape) == Approx(3.0 * 2 * kDegenerateJitter));
  CHECK_FALSE(fit_shape(ShapeKind::kCircle, line).degenerate_fallback);
  const FitResult single = fit_shape(ShapeKind::kPolygon, std::vector<Point2D>{{1, 1}});
  CHECK(single.degenerate_fallback);
}

TEST_CASE("shape kind names round-trip") {
  for (auto kind : kAllShapeKinds) CHECK(shape_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(shape_kind_from_string("hexagon"), InvalidInputError);
}
