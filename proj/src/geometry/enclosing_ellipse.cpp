#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "vrucp/errors.hpp"
#include "vrucp/geometry.hpp"

namespace vrucp::geometry {

namespace {

constexpr double kDim = 2.0;

struct Sym2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
};

// Weighted center and scatter of the lifted points under weights u.
void moments(std::span<const Point2D> pts, const std::vector<double>& u, Point2D& center,
             Sym2& scatter) {
  center = {};
  for (std::size_t i = 0; i < pts.size(); ++i) center = center + u[i] * pts[i];
  scatter = {};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point2D d = pts[i] - center;
    scatter.xx += u[i] * d.x * d.x;
    scatter.xy += u[i] * d.x * d.y;
    scatter.yy += u[i] * d.y * d.y;
  }
}

// (p - c)^T S^{-1} (p - c)
double mahalanobis(const Sym2& s, double det, Point2D d) {
  return (s.yy * d.x * d.x - 2.0 * s.xy * d.x * d.y + s.xx * d.y * d.y) / det;
}

}  // namespace

std::size_t ellipse_iteration_cap(std::size_t n, double tolerance) {
  return static_cast<std::size_t>(
      std::ceil(100.0 * static_cast<double>(n) * std::log(1.0 / tolerance)));
}

Ellipse min_enclosing_ellipse(std::span<const Point2D> points, double tolerance) {
  if (!(tolerance > 0.0 && tolerance < 1.0)) {
    throw InvalidInputError("min_enclosing_ellipse: tolerance must lie in (0, 1)");
  }
  for (const auto& p : points) {
    if (!is_finite(p)) throw InvalidInputError("min_enclosing_ellipse: non-finite point");
  }
  // Only hull vertices can support the ellipse. Coordinates are taken
  // relative to the first vertex to keep the scatter well conditioned.
  Polygon hull;
  try {
    hull = convex_hull(points);
  } catch (const DegenerateInputError&) {
    throw DegenerateInputError("min_enclosing_ellipse: points do not span the plane");
  }
  const Point2D origin = hull.vertices.front();
  std::vector<Point2D> pts;
  pts.reserve(hull.vertices.size());
  for (const auto& p : hull.vertices) pts.push_back(p - origin);

  const std::size_t n = pts.size();
  const std::size_t cap = ellipse_iteration_cap(points.size(), tolerance);
  const double bound = 1.0 + kDim * (1.0 + tolerance) * (1.0 + tolerance);
  std::vector<double> u(n, 1.0 / static_cast<double>(n));
  std::vector<double> m(n);
  Point2D center;
  Sym2 scatter;

  std::size_t iter = 0;
  for (;; ++iter) {
    moments(pts, u, center, scatter);
    const double det = scatter.det();
    if (!(det > 0.0)) {
      throw NumericalError("min_enclosing_ellipse: singular scatter matrix", iter);
    }
    std::size_t hi = 0;
    std::size_t lo = n;
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = 1.0 + mahalanobis(scatter, det, pts[i] - center);
      if (m[i] > m[hi]) hi = i;
      if (u[i] > 0.0 && (lo == n || m[i] < m[lo])) lo = i;
    }
    if (m[hi] <= bound) break;
    if (iter >= cap) {
      throw NumericalError("min_enclosing_ellipse: no convergence after " +
                               std::to_string(iter) + " iterations",
                           iter);
    }
    // Todd-Yildirim away step when dropping weight from the most interior
    // support point gains more than growing toward the most exterior one.
    if (lo != n && (kDim + 1.0) - m[lo] > m[hi] - (kDim + 1.0)) {
      const double floor_step = -u[lo] / (1.0 - u[lo]);
      double step = floor_step;
      if (m[lo] - 1.0 > 1e-15) {
        step = std::max(floor_step, (m[lo] - (kDim + 1.0)) / ((kDim + 1.0) * (m[lo] - 1.0)));
      }
      for (auto& w : u) w *= 1.0 - step;
      u[lo] = step == floor_step ? 0.0 : u[lo] + step;
    } else {
      const double step = (m[hi] - (kDim + 1.0)) / ((kDim + 1.0) * (m[hi] - 1.0));
      for (auto& w : u) w *= 1.0 - step;
      u[hi] += step;
    }
  }

  // Shape matrix A = S^{-1} / d, so the semi-axes are sqrt(d * eigenvalues(S)).
  const double tr = scatter.xx + scatter.yy;
  const double gap = std::hypot(scatter.xx - scatter.yy, 2.0 * scatter.xy);
  const double l1 = 0.5 * (tr + gap);
  const double l2 = std::max(0.5 * (tr - gap), scatter.det() / l1);
  double theta = 0.5 * std::atan2(2.0 * scatter.xy, scatter.xx - scatter.yy);
  if (theta < 0.0) theta += std::numbers::pi;

  double major = std::sqrt(kDim * l1);
  double minor = std::sqrt(kDim * l2);

  // Grow uniformly until the ellipse contains every point.
  double worst = 0.0;
  for (const auto& p : pts) {
    const Point2D local = rotate(p - center, -theta);
    worst = std::max(worst, (local.x * local.x) / (major * major) + (local.y * local.y) / (minor * minor));
  }
  if (worst > 1.0) {
    const double s = std::sqrt(worst);
    major *= s;
    minor *= s;
  }
  return Ellipse{center + origin, major, minor, theta};
}

}  // namespace vrucp::geometry
