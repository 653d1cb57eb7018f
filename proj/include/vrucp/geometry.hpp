#ifndef VRUCP_GEOMETRY_HPP_
#define VRUCP_GEOMETRY_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "vrucp/types.hpp"

namespace vrucp::geometry {

// Absolute tolerance for every boundary test, in meters.
inline constexpr double kBoundaryTolerance = 1e-9;

inline constexpr double kDefaultEllipseTolerance = 1e-4;

/// Bird-eye-view size of a pedestrian. Depth runs along the heading, width
/// across it.
struct FootprintDims {
  double width = 0.5;
  double depth = 0.3;
};

struct Circle {
  Point2D center;
  double radius = 0.0;
};

struct Ellipse {
  Point2D center;
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double orientation = 0.0;  // direction of the major axis, radians
};

struct OrientedRect {
  Point2D center;
  double half_len = 0.0;     // along `orientation`
  double half_wid = 0.0;
  double orientation = 0.0;  // radians in [0, pi)

  std::array<Point2D, 4> corners() const;
};

/// Strictly convex polygon with counter-clockwise vertices.
struct Polygon {
  std::vector<Point2D> vertices;

  double signed_area() const;
};

enum class ShapeKind : std::uint8_t { kCircle, kEllipse, kRectangle, kPolygon };

inline constexpr std::array<ShapeKind, 4> kAllShapeKinds = {
    ShapeKind::kCircle, ShapeKind::kEllipse, ShapeKind::kRectangle, ShapeKind::kPolygon};

std::string_view to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(std::string_view name);

using ClusterShape = std::variant<Circle, Ellipse, OrientedRect, Polygon>;

ShapeKind kind_of(const ClusterShape& shape);

/// Orientation of the triangle (a, b, c): +1 counter-clockwise, -1 clockwise,
/// 0 collinear. Exact for all finite double inputs.
int orientation(Point2D a, Point2D b, Point2D c);

std::array<Point2D, 4> footprint_corners(Point2D center, double heading, const FootprintDims& dims);
std::array<Point2D, 4> footprint_corners(const VruState& state, const FootprintDims& dims);

/// Monotone-chain hull. Collinear boundary points are dropped. Throws
/// DegenerateInputError for fewer than 3 points or a collinear set.
Polygon convex_hull(std::span<const Point2D> points);

/// Welzl's algorithm (move-to-front form) over a deterministically shuffled
/// copy of the input.
Circle min_enclosing_circle(std::span<const Point2D> points, std::uint64_t seed = 0);

/// Khachiyan's first-order scheme for the minimum-area enclosing ellipse. The
/// iteration stops once every point lies inside the (1 + tolerance)-inflated
/// ellipse; the returned ellipse is then scaled about its center so that it
/// contains every point exactly.
Ellipse min_enclosing_ellipse(std::span<const Point2D> points,
                              double tolerance = kDefaultEllipseTolerance);

/// Iteration budget used by min_enclosing_ellipse for n points.
std::size_t ellipse_iteration_cap(std::size_t n, double tolerance);

/// Minimum-area oriented bounding rectangle. One side is always collinear
/// with an edge of the convex hull.
OrientedRect min_area_rect(std::span<const Point2D> points);

bool contains(const ClusterShape& shape, Point2D p, double tol = kBoundaryTolerance);
double area(const ClusterShape& shape);
Point2D centroid(const ClusterShape& shape);
/// Major-axis direction; 0 for circles and polygons.
double orientation_of(const ClusterShape& shape);

/// True when the convex quadrilateral `footprint` touches or overlaps `shape`.
bool intersects(const ClusterShape& shape, const std::array<Point2D, 4>& footprint,
                double tol = kBoundaryTolerance);

struct FitResult {
  ClusterShape shape;
  // The input was collinear and the shape was fitted on a jittered copy.
  bool degenerate_fallback = false;
};

// Half of the perpendicular jitter applied to collinear inputs.
inline constexpr double kDegenerateJitter = 0.0005;

/// Fits the minimal enclosing shape of the given kind. Collinear inputs (and
/// sets of fewer than 3 points) are widened by +/- kDegenerateJitter
/// perpendicular to their common line before fitting hull, rectangle or
/// ellipse.
FitResult fit_shape(ShapeKind kind, std::span<const Point2D> points, std::uint64_t seed = 0,
                    double ellipse_tolerance = kDefaultEllipseTolerance);

}  // namespace vrucp::geometry

#endif  // VRUCP_GEOMETRY_HPP_
