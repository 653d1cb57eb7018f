#ifndef VRUCP_METRICS_HPP_
#define VRUCP_METRICS_HPP_

#include <compare>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "vrucp/geometry.hpp"
#include "vrucp/types.hpp"

namespace vrucp::metrics {

using geometry::ClusterShape;
using geometry::ShapeKind;

/// Full: every optional field of the shape is sent. Compulsory: only the
/// mandatory ones.
enum class SizeMode { kFull, kCompulsory };

std::string_view to_string(SizeMode mode);
SizeMode size_mode_from_string(std::string_view name);

/// Encoded shape sizes. Kept in bits so that half-byte entries stay integral.
struct ShapeSizeModel {
  std::int64_t circle_full_bits = 72;
  std::int64_t circle_compulsory_bits = 12;
  std::int64_t ellipse_full_bits = 96;
  std::int64_t ellipse_compulsory_bits = 24;
  std::int64_t rectangle_full_bits = 96;
  std::int64_t rectangle_compulsory_bits = 24;
  std::int64_t polygon_full_base_bits = 60;
  std::int64_t polygon_full_point_bits = 48;
  std::int64_t polygon_compulsory_base_bits = 0;
  std::int64_t polygon_compulsory_point_bits = 32;

  /// Throws ConfigError for a non-positive cost (polygon bases may be 0).
  void validate() const;
};

/// Polygon sizes need `vertices` (>= 3); other kinds ignore it.
std::int64_t shape_size_bits(ShapeKind kind, std::size_t vertices, SizeMode mode,
                             const ShapeSizeModel& model = {});
std::int64_t shape_size_bits(const ClusterShape& shape, SizeMode mode, const ShapeSizeModel& model = {});
double shape_size_bytes(const ClusterShape& shape, SizeMode mode, const ShapeSizeModel& model = {});

/// Exact cluster accuracy: `correct` members out of `under` VRUs under the shape.
struct Accuracy {
  std::size_t correct = 0;
  std::size_t under = 0;

  double value() const { return under == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(under); }

  friend std::strong_ordering operator<=>(const Accuracy& a, const Accuracy& b) {
    // 0/0 sorts lowest. Counts are frame sizes, so the products cannot overflow.
    if (a.under == 0 || b.under == 0) return (a.under != 0) <=> (b.under != 0);
    return static_cast<std::uint64_t>(a.correct) * b.under <=> static_cast<std::uint64_t>(b.correct) * a.under;
  }
  friend bool operator==(const Accuracy& a, const Accuracy& b) { return (a <=> b) == 0; }
};

/// How a VRU counts as "under" a shape.
enum class UnderShape {
  kCenter,     // its footprint center lies in the shape
  kFootprint,  // its footprint touches the shape
};

/// What the shapes are fitted to.
enum class Enclosure {
  kCorners,  // every corner of every member footprint
  kCenters,  // member positions only
};

std::string_view to_string(UnderShape mode);
UnderShape under_shape_from_string(std::string_view name);
std::string_view to_string(Enclosure mode);
Enclosure enclosure_from_string(std::string_view name);

/// `members` must be sorted. A VRU scores 1 when it is under the shape and is
/// a member.
Accuracy cluster_accuracy(const ClusterShape& shape, std::span<const VruId> members,
                          std::span<const VruState> frame_states, UnderShape under = UnderShape::kCenter,
                          const geometry::FootprintDims& dims = {});

/// size [bit] * area [m^2] / members. Throws InvalidInputError for zero members.
double cadi(const ClusterShape& shape, std::size_t n_members, SizeMode mode,
            const ShapeSizeModel& model = {});

struct ShapeEvaluation {
  ClusterShape shape;
  ShapeKind kind = ShapeKind::kCircle;
  Accuracy ca;
  double cadi = 0.0;
  std::int64_t size_bits = 0;
  double area = 0.0;
  std::size_t n_members = 0;
  std::size_t n_under_shape = 0;
  bool degenerate_fallback = false;
};

/// Highest accuracy first, then lowest CADI, then rectangle, circle, ellipse,
/// polygon. Throws InvalidInputError on empty input.
const ShapeEvaluation& select_adaptive(std::span<const ShapeEvaluation> evaluations);

/// Tie-break rank used by select_adaptive; lower wins.
int adaptive_priority(ShapeKind kind);

struct EvalOptions {
  SizeMode mode = SizeMode::kCompulsory;
  ShapeSizeModel sizes;
  UnderShape under = UnderShape::kCenter;
  Enclosure enclosure = Enclosure::kCorners;
  geometry::FootprintDims dims;
  std::uint64_t seed = 0;
  double ellipse_tolerance = geometry::kDefaultEllipseTolerance;
};

/// Points the shapes of a cluster are fitted to.
std::vector<Point2D> enclosure_points(std::span<const VruState> members, const EvalOptions& options);

/// Evaluates one shape already fitted to `members`.
ShapeEvaluation evaluate_shape(const geometry::FitResult& fit, std::span<const VruId> members,
                               std::span<const VruState> frame_states, const EvalOptions& options);

/// Fits and evaluates all four kinds, in circle, ellipse, rectangle, polygon
/// order. Throws InvalidInputError if a member is missing from the frame.
std::vector<ShapeEvaluation> evaluate_cluster(std::span<const VruId> members,
                                              std::span<const VruState> frame_states,
                                              const EvalOptions& options = {});

}  // namespace vrucp::metrics

#endif  // VRUCP_METRICS_HPP_
