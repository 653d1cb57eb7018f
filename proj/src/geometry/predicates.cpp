#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "vrucp/geometry.hpp"

namespace vrucp::geometry {

namespace {
// Forward error bound of the double evaluation of the 2x2 determinant
// (Shewchuk's ccwerrboundA).
constexpr double kOrientErrBound = (3.0 + 16.0 * 0x1p-53) * 0x1p-53;

int exact_orientation(Point2D a, Point2D b, Point2D c) {
  using boost::multiprecision::cpp_rational;
  const cpp_rational ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
  const cpp_rational det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
  return det.sign();
}
}  // namespace

int orientation(Point2D a, Point2D b, Point2D c) {
  const double left = (b.x - a.x) * (c.y - a.y);
  const double right = (b.y - a.y) * (c.x - a.x);
  const double det = left - right;
  const double bound = kOrientErrBound * (std::abs(left) + std::abs(right));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return exact_orientation(a, b, c);
}

}  // namespace vrucp::geometry
