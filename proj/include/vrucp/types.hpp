#ifndef VRUCP_TYPES_HPP_
#define VRUCP_TYPES_HPP_

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace vrucp {

/// Planar position in meters (x east, y north).
struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2D operator+(Point2D a, Point2D b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2D operator-(Point2D a, Point2D b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2D operator*(double s, Point2D p) { return {s * p.x, s * p.y}; }
  friend constexpr Point2D operator*(Point2D p, double s) { return {s * p.x, s * p.y}; }
  friend constexpr bool operator==(Point2D, Point2D) = default;
  friend constexpr auto operator<=>(Point2D, Point2D) = default;
};

constexpr double dot(Point2D a, Point2D b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2D a, Point2D b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2D a) { return std::hypot(a.x, a.y); }
inline double distance(Point2D a, Point2D b) { return norm(a - b); }
inline bool is_finite(Point2D p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Rotates `p` counter-clockwise by `angle` radians about the origin.
inline Point2D rotate(Point2D p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

inline std::ostream& operator<<(std::ostream& os, Point2D p) {
  return os << '(' << p.x << ", " << p.y << ')';
}

/// Identifier of one tracked road user.
struct VruId {
  std::int64_t value = 0;

  friend constexpr bool operator==(VruId, VruId) = default;
  friend constexpr auto operator<=>(VruId, VruId) = default;
};

inline std::ostream& operator<<(std::ostream& os, VruId id) { return os << id.value; }

/// One timestamped observation of a VRU.
struct VruState {
  VruId id;
  double timestamp = 0.0;  // seconds
  Point2D position;
  double speed = 0.0;    // m/s
  double heading = 0.0;  // radians, CCW from +x
  // Set when the source row had no heading and it was reconstructed from
  // consecutive positions.
  bool heading_derived = false;

  Point2D velocity() const { return {speed * std::cos(heading), speed * std::sin(heading)}; }

  friend bool operator==(const VruState&, const VruState&) = default;
};

}  // namespace vrucp

template <>
struct std::hash<vrucp::VruId> {
  std::size_t operator()(vrucp::VruId id) const noexcept { return std::hash<std::int64_t>{}(id.value); }
};

#endif  // VRUCP_TYPES_HPP_
