#include "vrucp/cpm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "vrucp/errors.hpp"

namespace vrucp::cpm {

namespace {

int delta_time_ms(double measured, double generated) {
  const double ms = std::round((measured - generated) * 1000.0);
  return static_cast<int>(std::clamp(ms, static_cast<double>(kMinDeltaTimeMs), static_cast<double>(kMaxDeltaTimeMs)));
}

nlohmann::json xy(Point2D p) { return {{"x", p.x}, {"y", p.y}}; }
nlohmann::json xyz(const std::array<double, 3>& v) { return {{"x", v[0]}, {"y", v[1]}, {"z", v[2]}}; }

}  // namespace

void CpmSizeModel::validate() const {
  if (base_bytes <= 0 || vru_object_bytes <= 0 || cluster_object_base_bytes <= 0) {
    throw ConfigError("cpm size model: base, VRU object and cluster object sizes must be positive");
  }
  shapes.validate();
}

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::kNoCluster: return "no-cluster";
    case Policy::kCircle: return "circle";
    case Policy::kEllipse: return "ellipse";
    case Policy::kRectangle: return "rectangle";
    case Policy::kPolygon: return "polygon";
    case Policy::kAdaptive: return "adaptive";
  }
  return "?";
}

Policy policy_from_string(std::string_view name) {
  for (const auto p : kAllPolicies) {
    if (to_string(p) == name) return p;
  }
  throw InvalidInputError("unknown policy '" + std::string(name) +
                          "' (expected no-cluster, circle, ellipse, rectangle, polygon or adaptive)");
}

std::optional<geometry::ShapeKind> fixed_shape(Policy policy) {
  switch (policy) {
    case Policy::kCircle: return geometry::ShapeKind::kCircle;
    case Policy::kEllipse: return geometry::ShapeKind::kEllipse;
    case Policy::kRectangle: return geometry::ShapeKind::kRectangle;
    case Policy::kPolygon: return geometry::ShapeKind::kPolygon;
    default: return std::nullopt;
  }
}

std::vector<CpmMessage> build_cpms(double generation_time, std::span<const VruState> frame,
                                   std::span<const ClusterDescription> clusters, Policy policy,
                                   const CpmSizeModel& model, const geometry::FootprintDims& dims) {
  std::map<VruId, const VruState*> by_id;
  for (const auto& s : frame) {
    if (!by_id.emplace(s.id, &s).second) {
      std::ostringstream os;
      os << "build_cpms: VRU " << s.id << " appears twice in the frame";
      throw InvalidInputError(os.str());
    }
  }

  std::vector<PerceivedObject> objects;
  std::set<VruId> clustered;
  if (policy != Policy::kNoCluster) {
    const auto expected = fixed_shape(policy);
    for (const auto& c : clusters) {
      if (c.members.size() < 2) throw InvalidInputError("build_cpms: cluster with fewer than 2 members");
      if (expected && geometry::kind_of(c.shape) != *expected) {
        throw InvalidInputError("build_cpms: cluster shape does not match the " + std::string(to_string(policy)) +
                                " policy");
      }
      PerceivedObject obj;
      obj.object_class = ObjectClass::kVruCluster;
      obj.object_id = c.id;
      obj.position = geometry::centroid(c.shape);
      obj.angles = {0.0, 0.0, geometry::orientation_of(c.shape)};
      obj.shape = c.shape;
      obj.cardinality = c.members.size();
      Point2D velocity;
      double delta = 0.0;
      for (const auto id : c.members) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
          std::ostringstream os;
          os << "build_cpms: cluster " << c.id << " member " << id << " is not in the frame";
          throw InvalidInputError(os.str());
        }
        if (!clustered.insert(id).second) {
          std::ostringstream os;
          os << "build_cpms: VRU " << id << " belongs to more than one cluster";
          throw InvalidInputError(os.str());
        }
        velocity = velocity + it->second->velocity();
        delta += it->second->timestamp;
      }
      const double n = static_cast<double>(c.members.size());
      obj.velocity = velocity * (1.0 / n);
      obj.measurement_delta_time = delta_time_ms(delta / n, generation_time);
      objects.push_back(std::move(obj));
    }
  }
  for (const auto& [id, s] : by_id) {
    if (clustered.count(id)) continue;
    PerceivedObject obj;
    obj.object_class = ObjectClass::kVru;
    obj.object_id = id.value;
    obj.position = s->position;
    obj.velocity = s->velocity();
    obj.angles = {0.0, 0.0, s->heading};
    obj.dimensions = {dims.depth, dims.width, 0.0};
    obj.measurement_delta_time = delta_time_ms(s->timestamp, generation_time);
    objects.push_back(std::move(obj));
  }

  std::sort(objects.begin(), objects.end(),
            [](const PerceivedObject& a, const PerceivedObject& b) { return a.object_id < b.object_id; });
  for (std::size_t i = 1; i < objects.size(); ++i) {
    if (objects[i].object_id == objects[i - 1].object_id) {
      throw InvalidInputError("build_cpms: object id " + std::to_string(objects[i].object_id) + " used twice");
    }
  }

  std::vector<CpmMessage> messages;
  for (std::size_t begin = 0; begin < objects.size(); begin += kMaxObjectsPerMessage) {
    const std::size_t end = std::min(objects.size(), begin + kMaxObjectsPerMessage);
    CpmMessage msg;
    msg.generation_time = generation_time;
    msg.objects.assign(std::make_move_iterator(objects.begin() + static_cast<std::ptrdiff_t>(begin)),
                       std::make_move_iterator(objects.begin() + static_cast<std::ptrdiff_t>(end)));
    msg.total_bytes = cpm_size_bytes(msg, model);
    messages.push_back(std::move(msg));
  }
  return messages;
}

std::int64_t object_size_bits(const PerceivedObject& object, const CpmSizeModel& model) {
  if (object.object_class == ObjectClass::kVru) return 8 * model.vru_object_bytes;
  if (!object.shape) throw InvalidInputError("cluster object without a shape");
  return 8 * model.cluster_object_base_bytes + metrics::shape_size_bits(*object.shape, model.mode, model.shapes);
}

std::int64_t cpm_size_bits(const CpmMessage& message, const CpmSizeModel& model) {
  std::int64_t bits = 8 * model.base_bytes;
  for (const auto& o : message.objects) bits += object_size_bits(o, model);
  return bits;
}

std::int64_t cpm_size_bytes(const CpmMessage& message, const CpmSizeModel& model) {
  return (cpm_size_bits(message, model) + 7) / 8;
}

void check_byte_bound(const CpmSizeModel& model, std::span<const Policy> policies, metrics::Enclosure enclosure) {
  model.validate();
  std::set<geometry::ShapeKind> kinds;
  for (const auto p : policies) {
    if (p == Policy::kAdaptive) kinds.insert(geometry::kAllShapeKinds.begin(), geometry::kAllShapeKinds.end());
    if (const auto k = fixed_shape(p)) kinds.insert(*k);
  }
  for (const auto kind : kinds) {
    for (std::size_t k = 2; k <= kMaxObjectsPerMessage; ++k) {
      // Two or more collinear centers are widened into a 4-vertex hull.
      const std::size_t vertices = enclosure == metrics::Enclosure::kCorners ? 4 * k : std::max<std::size_t>(k, 4);
      const std::int64_t cluster_bits =
          8 * model.cluster_object_base_bytes + metrics::shape_size_bits(kind, vertices, model.mode, model.shapes);
      const std::int64_t individual_bits = 8 * model.vru_object_bytes * static_cast<std::int64_t>(k);
      if (cluster_bits > individual_bits) {
        std::ostringstream os;
        os << "cpm size model violates the cluster byte bound: a " << geometry::to_string(kind) << " cluster of " << k
           << " VRUs costs " << static_cast<double>(cluster_bits) / 8.0 << " B (cluster_object_base_bytes="
           << model.cluster_object_base_bytes << ", shape " << metrics::to_string(model.mode) << " size "
           << static_cast<double>(cluster_bits) / 8.0 - static_cast<double>(model.cluster_object_base_bytes)
           << " B) but " << k << " individual objects cost " << individual_bits / 8
           << " B (vru_object_bytes=" << model.vru_object_bytes << ")";
        throw ConfigError(os.str());
      }
    }
  }
}

nlohmann::json shape_to_json(const geometry::ClusterShape& shape) {
  nlohmann::json j;
  j["kind"] = std::string(geometry::to_string(geometry::kind_of(shape)));
  nlohmann::json dims;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, geometry::Circle>) {
          dims = {{"center", xy(s.center)}, {"radius", s.radius}};
        } else if constexpr (std::is_same_v<T, geometry::Ellipse>) {
          dims = {{"center", xy(s.center)},
                  {"semi_major_axis", s.semi_major},
                  {"semi_minor_axis", s.semi_minor},
                  {"orientation", s.orientation}};
        } else if constexpr (std::is_same_v<T, geometry::OrientedRect>) {
          dims = {{"center", xy(s.center)},
                  {"semi_length", s.half_len},
                  {"semi_width", s.half_wid},
                  {"orientation", s.orientation}};
        } else {
          dims["vertices"] = nlohmann::json::array();
          for (const auto& v : s.vertices) dims["vertices"].push_back(xy(v));
        }
      },
      shape);
  j["shape_dimensions"] = std::move(dims);
  return j;
}

nlohmann::json to_json(const PerceivedObject& o) {
  nlohmann::json j;
  j["class"] = o.object_class == ObjectClass::kVru ? "vru" : "vru_cluster";
  j["object_id"] = o.object_id;
  j["position"] = xy(o.position);
  j["velocity"] = xy(o.velocity);
  j["angles"] = xyz(o.angles);
  if (o.object_class == ObjectClass::kVru) {
    j["dimensions"] = xyz(o.dimensions);
  } else {
    nlohmann::json shape = o.shape ? shape_to_json(*o.shape) : nlohmann::json{};
    shape["cardinality"] = o.cardinality;
    j["cluster_shape"] = std::move(shape);
  }
  j["measurement_delta_time"] = o.measurement_delta_time;
  return j;
}

nlohmann::json to_json(const CpmMessage& m) {
  nlohmann::json j;
  j["generation_time"] = m.generation_time;
  j["message_header"] = nlohmann::json::object();
  j["management_container"] = nlohmann::json::object();
  j["originating_rsu_container"] = nlohmann::json::object();
  j["sensor_information_container"] = nlohmann::json::object();
  j["perceived_object_container"] = nlohmann::json::array();
  for (const auto& o : m.objects) j["perceived_object_container"].push_back(to_json(o));
  j["number_of_perceived_objects"] = m.objects.size();
  j["total_bytes"] = m.total_bytes;
  return j;
}

}  // namespace vrucp::cpm
