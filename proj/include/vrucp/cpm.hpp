#ifndef VRUCP_CPM_HPP_
#define VRUCP_CPM_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vrucp/geometry.hpp"
#include "vrucp/metrics.hpp"
#include "vrucp/types.hpp"

namespace vrucp::cpm {

/// Perceived-object container capacity of one message.
inline constexpr std::size_t kMaxObjectsPerMessage = 255;
inline constexpr int kMinDeltaTimeMs = -2048;
inline constexpr int kMaxDeltaTimeMs = 2047;

enum class ObjectClass { kVru, kVruCluster };

struct PerceivedObject {
  ObjectClass object_class = ObjectClass::kVru;
  std::int64_t object_id = 0;
  Point2D position;
  Point2D velocity;
  std::array<double, 3> angles{};      // radians; z is the heading / shape orientation
  std::array<double, 3> dimensions{};  // VRU only: depth, width, height (0 = not measured)
  std::optional<geometry::ClusterShape> shape;  // clusters only
  std::size_t cardinality = 0;                  // clusters only
  int measurement_delta_time = 0;               // ms, measurement minus generation time
};

struct CpmMessage {
  double generation_time = 0.0;
  std::vector<PerceivedObject> objects;
  std::int64_t total_bytes = 0;
};

/// Byte costs of everything but the cluster shape. The defaults are
/// assumptions, not measured encodings; all of them can be overridden.
struct CpmSizeModel {
  std::int64_t base_bytes = 60;  // header, management, originating-RSU and sensor-information containers
  std::int64_t vru_object_bytes = 35;
  std::int64_t cluster_object_base_bytes = 29;
  metrics::ShapeSizeModel shapes;
  metrics::SizeMode mode = metrics::SizeMode::kCompulsory;

  /// Throws ConfigError for a non-positive constant.
  void validate() const;
};

enum class Policy { kNoCluster, kCircle, kEllipse, kRectangle, kPolygon, kAdaptive };

inline constexpr std::array<Policy, 6> kAllPolicies = {Policy::kNoCluster, Policy::kCircle,
                                                       Policy::kEllipse,   Policy::kRectangle,
                                                       Policy::kPolygon,   Policy::kAdaptive};

std::string_view to_string(Policy policy);
/// Accepts the names printed by to_string ("no-cluster", "circle", ...).
Policy policy_from_string(std::string_view name);
/// Shape kind a fixed-shape policy sends; nullopt for no-cluster and adaptive.
std::optional<geometry::ShapeKind> fixed_shape(Policy policy);

/// An active cluster with the shape chosen for it under the current policy.
struct ClusterDescription {
  std::int64_t id = 0;
  std::vector<VruId> members;  // sorted
  geometry::ClusterShape shape;
};

/// Assembles the messages for one generation event. Under no-cluster every
/// VRU is its own object and `clusters` is ignored; otherwise each cluster is
/// one object and the remaining VRUs are sent individually. Objects are
/// ordered by id and split into messages of at most 255. A frame with no
/// objects yields no message. Throws InvalidInputError for a VRU in two
/// clusters, a member missing from the frame, a cluster with fewer than 2
/// members, a shape that does not match a fixed-shape policy, or clashing
/// object ids.
std::vector<CpmMessage> build_cpms(double generation_time, std::span<const VruState> frame,
                                   std::span<const ClusterDescription> clusters, Policy policy,
                                   const CpmSizeModel& model = {},
                                   const geometry::FootprintDims& dims = {});

std::int64_t object_size_bits(const PerceivedObject& object, const CpmSizeModel& model);
/// Exact sum of the message's parts in bits.
std::int64_t cpm_size_bits(const CpmMessage& message, const CpmSizeModel& model);
/// cpm_size_bits rounded up to whole bytes.
std::int64_t cpm_size_bytes(const CpmMessage& message, const CpmSizeModel& model);

/// Clusters only save bytes if describing k >= 2 members as one object is
/// never dearer than k individual objects. Checks that for every shape the
/// policies may send and every k up to 255, with polygon vertex counts
/// bounded by the enclosure (4 per member for footprint corners). Throws
/// ConfigError naming the violating constants.
void check_byte_bound(const CpmSizeModel& model, std::span<const Policy> policies,
                      metrics::Enclosure enclosure = metrics::Enclosure::kCorners);

nlohmann::json shape_to_json(const geometry::ClusterShape& shape);
nlohmann::json to_json(const PerceivedObject& object);
nlohmann::json to_json(const CpmMessage& message);

}  // namespace vrucp::cpm

#endif  // VRUCP_CPM_HPP_
