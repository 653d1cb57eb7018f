#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "vrucp/errors.hpp"
#include "vrucp/geometry.hpp"

namespace vrucp::geometry {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double segment_distance(Point2D p, Point2D a, Point2D b) {
  const Point2D ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

// Distance from p to a convex CCW polygon; 0 inside.
double convex_distance(Point2D p, std::span<const Point2D> poly) {
  const std::size_t n = poly.size();
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D a = poly[i];
    const Point2D b = poly[(i + 1) % n];
    if (cross(b - a, p - a) < 0.0) inside = false;
    best = std::min(best, segment_distance(p, a, b));
  }
  return inside ? 0.0 : best;
}

// Outward distance of p beyond the boundary of a convex CCW polygon; <= 0
// inside. Exact for points near an edge, which is all the tolerance needs.
double polygon_excess(Point2D p, std::span<const Point2D> poly) {
  const std::size_t n = poly.size();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D a = poly[i];
    const Point2D edge = poly[(i + 1) % n] - a;
    worst = std::max(worst, -cross(edge, p - a) / norm(edge));
  }
  return worst;
}

// Euclidean distance from a point outside the axis-aligned ellipse
// (x/a)^2 + (y/b)^2 = 1 to its boundary, by bisection on the normal-line
// parameter.
double ellipse_distance(double a, double b, Point2D p) {
  const double x0 = std::abs(p.x);
  const double y0 = std::abs(p.y);
  const double big = std::max(a, b);
  double lo = 0.0;
  double hi = big * std::hypot(x0, y0) + big * big;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double t = 0.5 * (lo + hi);
    if (t == lo || t == hi) break;
    const double fx = a * x0 / (t + a * a);
    const double fy = b * y0 / (t + b * b);
    (fx * fx + fy * fy - 1.0 > 0.0 ? lo : hi) = t;
  }
  const double t = 0.5 * (lo + hi);
  const Point2D closest{a * a * x0 / (t + a * a), b * b * y0 / (t + b * b)};
  return distance({x0, y0}, closest);
}

std::vector<Point2D> as_polygon(const OrientedRect& r) {
  const auto c = r.corners();
  return {c.begin(), c.end()};
}

bool separated_on_axes(std::span<const Point2D> a, std::span<const Point2D> b, double tol) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D edge = a[(i + 1) % n] - a[i];
    const double len = norm(edge);
    if (len == 0.0) continue;
    const Point2D axis{-edge.y / len, edge.x / len};
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = -amin;
    for (const auto& p : a) {
      amin = std::min(amin, dot(p, axis));
      amax = std::max(amax, dot(p, axis));
    }
    for (const auto& p : b) {
      bmin = std::min(bmin, dot(p, axis));
      bmax = std::max(bmax, dot(p, axis));
    }
    if (amax < bmin - tol || bmax < amin - tol) return true;
  }
  return false;
}

bool convex_overlap(std::span<const Point2D> a, std::span<const Point2D> b, double tol) {
  return !separated_on_axes(a, b, tol) && !separated_on_axes(b, a, tol);
}

// Makes a quadrilateral counter-clockwise.
std::array<Point2D, 4> ccw(std::array<Point2D, 4> q) {
  double twice = 0.0;
  for (std::size_t i = 0; i < 4; ++i) twice += cross(q[i], q[(i + 1) % 4]);
  if (twice < 0.0) std::reverse(q.begin(), q.end());
  return q;
}

}  // namespace

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kCircle: return "circle";
    case ShapeKind::kEllipse: return "ellipse";
    case ShapeKind::kRectangle: return "rectangle";
    case ShapeKind::kPolygon: return "polygon";
  }
  return "unknown";
}

ShapeKind shape_kind_from_string(std::string_view name) {
  for (auto kind : kAllShapeKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidInputError("unknown shape kind '" + std::string(name) + "'");
}

ShapeKind kind_of(const ClusterShape& shape) {
  return std::visit(Overloaded{
                        [](const Circle&) { return ShapeKind::kCircle; },
                        [](const Ellipse&) { return ShapeKind::kEllipse; },
                        [](const OrientedRect&) { return ShapeKind::kRectangle; },
                        [](const Polygon&) { return ShapeKind::kPolygon; },
                    },
                    shape);
}

std::array<Point2D, 4> footprint_corners(Point2D center, double heading, const FootprintDims& dims) {
  if (!is_finite(center) || !std::isfinite(heading) || !std::isfinite(dims.width) ||
      !std::isfinite(dims.depth)) {
    throw InvalidInputError("footprint_corners: non-finite input");
  }
  if (!(dims.width > 0.0 && dims.depth > 0.0)) {
    throw InvalidInputError("footprint_corners: footprint dimensions must be positive");
  }
  const OrientedRect r{center, 0.5 * dims.depth, 0.5 * dims.width, heading};
  return r.corners();
}

std::array<Point2D, 4> footprint_corners(const VruState& state, const FootprintDims& dims) {
  return footprint_corners(state.position, state.heading, dims);
}

bool contains(const ClusterShape& shape, Point2D p, double tol) {
  return std::visit(
      Overloaded{
          [&](const Circle& c) { return distance(c.center, p) <= c.radius + tol; },
          [&](const Ellipse& e) {
            const Point2D local = rotate(p - e.center, -e.orientation);
            const double q = (local.x / e.semi_major) * (local.x / e.semi_major) +
                             (local.y / e.semi_minor) * (local.y / e.semi_minor);
            if (q <= 1.0) return true;
            // Cheap rejection: the point lies on the ellipse scaled by sqrt(q),
            // at least (sqrt(q) - 1) * semi_minor away.
            if ((std::sqrt(q) - 1.0) * e.semi_minor > tol) return false;
            return ellipse_distance(e.semi_major, e.semi_minor, local) <= tol;
          },
          [&](const OrientedRect& r) {
            const Point2D local = rotate(p - r.center, -r.orientation);
            return std::abs(local.x) <= r.half_len + tol && std::abs(local.y) <= r.half_wid + tol;
          },
          [&](const Polygon& poly) { return polygon_excess(p, poly.vertices) <= tol; },
      },
      shape);
}

double area(const ClusterShape& shape) {
  return std::visit(Overloaded{
                        [](const Circle& c) { return std::numbers::pi * c.radius * c.radius; },
                        [](const Ellipse& e) { return std::numbers::pi * e.semi_major * e.semi_minor; },
                        [](const OrientedRect& r) { return 4.0 * r.half_len * r.half_wid; },
                        [](const Polygon& p) { return std::abs(p.signed_area()); },
                    },
                    shape);
}

Point2D centroid(const ClusterShape& shape) {
  return std::visit(Overloaded{
                        [](const Circle& c) { return c.center; },
                        [](const Ellipse& e) { return e.center; },
                        [](const OrientedRect& r) { return r.center; },
                        [](const Polygon& p) {
                          const auto& v = p.vertices;
                          const Point2D o = v.front();
                          double twice = 0.0;
                          Point2D acc;
                          for (std::size_t i = 0; i < v.size(); ++i) {
                            const Point2D a = v[i] - o;
                            const Point2D b = v[(i + 1) % v.size()] - o;
                            const double w = cross(a, b);
                            twice += w;
                            acc = acc + w * (a + b);
                          }
                          return o + (1.0 / (3.0 * twice)) * acc;
                        },
                    },
                    shape);
}

double orientation_of(const ClusterShape& shape) {
  return std::visit(Overloaded{
                        [](const Circle&) { return 0.0; },
                        [](const Ellipse& e) { return e.orientation; },
                        [](const OrientedRect& r) { return r.orientation; },
                        [](const Polygon&) { return 0.0; },
                    },
                    shape);
}

bool intersects(const ClusterShape& shape, const std::array<Point2D, 4>& footprint, double tol) {
  const auto quad = ccw(footprint);
  return std::visit(
      Overloaded{
          [&](const Circle& c) { return convex_distance(c.center, quad) <= c.radius + tol; },
          [&](const Ellipse& e) {
            // Map the ellipse onto the unit circle; the quad stays convex.
            std::array<Point2D, 4> mapped;
            for (std::size_t i = 0; i < 4; ++i) {
              const Point2D local = rotate(quad[i] - e.center, -e.orientation);
              mapped[i] = {local.x / e.semi_major, local.y / e.semi_minor};
            }
            return convex_distance({0.0, 0.0}, ccw(mapped)) <= 1.0 + tol / e.semi_major;
          },
          [&](const OrientedRect& r) { return convex_overlap(as_polygon(r), quad, tol); },
          [&](const Polygon& p) { return convex_overlap(p.vertices, quad, tol); },
      },
      shape);
}

FitResult fit_shape(ShapeKind kind, std::span<const Point2D> points, std::uint64_t seed,
                    double ellipse_tolerance) {
  if (points.empty()) throw InvalidInputError("fit_shape: empty point set");
  if (kind == ShapeKind::kCircle) return {min_enclosing_circle(points, seed), false};

  const Point2D first = points.front();
  std::size_t far = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (distance(first, points[i]) > distance(first, points[far])) far = i;
  }
  bool spans = false;
  for (std::size_t i = 1; i < points.size() && far != 0 && !spans; ++i) {
    spans = orientation(first, points[far], points[i]) != 0;
  }

  std::vector<Point2D> widened;
  std::span<const Point2D> input = points;
  if (!spans) {
    Point2D along{1.0, 0.0};
    if (far != 0) along = (1.0 / distance(first, points[far])) * (points[far] - first);
    const Point2D across{-along.y, along.x};
    widened.reserve(points.size() * 4);
    for (const auto& p : points) {
      widened.push_back(p + kDegenerateJitter * across);
      widened.push_back(p - kDegenerateJitter * across);
      if (far == 0) {
        widened.push_back(p + kDegenerateJitter * along);
        widened.push_back(p - kDegenerateJitter * along);
      }
    }
    input = widened;
  }

  FitResult out{Circle{}, !spans};
  switch (kind) {
    case ShapeKind::kEllipse: out.shape = min_enclosing_ellipse(input, ellipse_tolerance); break;
    case ShapeKind::kRectangle: out.shape = min_area_rect(input); break;
    case ShapeKind::kPolygon: out.shape = convex_hull(input); break;
    case ShapeKind::kCircle: break;
  }
  return out;
}

}  // namespace vrucp::geometry
