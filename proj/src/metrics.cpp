#include "vrucp/metrics.hpp"

#include <algorithm>
#include <sstream>
#include <string>

#include "vrucp/errors.hpp"

namespace vrucp::metrics {

namespace {

std::size_t vertex_count(const ClusterShape& shape) {
  if (const auto* poly = std::get_if<geometry::Polygon>(&shape)) return poly->vertices.size();
  return 0;
}

}  // namespace

std::string_view to_string(SizeMode mode) {
  return mode == SizeMode::kFull ? "full" : "compulsory";
}

SizeMode size_mode_from_string(std::string_view name) {
  if (name == "full") return SizeMode::kFull;
  if (name == "compulsory") return SizeMode::kCompulsory;
  throw InvalidInputError("unknown size mode '" + std::string(name) + "' (expected full or compulsory)");
}

std::string_view to_string(UnderShape mode) {
  return mode == UnderShape::kCenter ? "center" : "footprint";
}

UnderShape under_shape_from_string(std::string_view name) {
  if (name == "center") return UnderShape::kCenter;
  if (name == "footprint") return UnderShape::kFootprint;
  throw InvalidInputError("unknown under-shape rule '" + std::string(name) + "' (expected center or footprint)");
}

std::string_view to_string(Enclosure mode) {
  return mode == Enclosure::kCorners ? "corners" : "centers";
}

Enclosure enclosure_from_string(std::string_view name) {
  if (name == "corners") return Enclosure::kCorners;
  if (name == "centers") return Enclosure::kCenters;
  throw InvalidInputError("unknown enclosure '" + std::string(name) + "' (expected corners or centers)");
}

void ShapeSizeModel::validate() const {
  const std::pair<const char*, std::int64_t> positive[] = {
      {"circle_full_bits", circle_full_bits},
      {"circle_compulsory_bits", circle_compulsory_bits},
      {"ellipse_full_bits", ellipse_full_bits},
      {"ellipse_compulsory_bits", ellipse_compulsory_bits},
      {"rectangle_full_bits", rectangle_full_bits},
      {"rectangle_compulsory_bits", rectangle_compulsory_bits},
      {"polygon_full_point_bits", polygon_full_point_bits},
      {"polygon_compulsory_point_bits", polygon_compulsory_point_bits},
  };
  for (const auto& [name, value] : positive) {
    if (value <= 0) throw ConfigError(std::string("shape size ") + name + " must be positive");
  }
  if (polygon_full_base_bits < 0 || polygon_compulsory_base_bits < 0) {
    throw ConfigError("shape size polygon base must not be negative");
  }
}

std::int64_t shape_size_bits(ShapeKind kind, std::size_t vertices, SizeMode mode, const ShapeSizeModel& m) {
  const bool full = mode == SizeMode::kFull;
  switch (kind) {
    case ShapeKind::kCircle:
      return full ? m.circle_full_bits : m.circle_compulsory_bits;
    case ShapeKind::kEllipse:
      return full ? m.ellipse_full_bits : m.ellipse_compulsory_bits;
    case ShapeKind::kRectangle:
      return full ? m.rectangle_full_bits : m.rectangle_compulsory_bits;
    case ShapeKind::kPolygon: {
      if (vertices < 3) throw InvalidInputError("polygon size needs at least 3 vertices");
      const auto n = static_cast<std::int64_t>(vertices);
      return full ? m.polygon_full_base_bits + n * m.polygon_full_point_bits
                  : m.polygon_compulsory_base_bits + n * m.polygon_compulsory_point_bits;
    }
  }
  throw Error("unreachable shape kind");
}

std::int64_t shape_size_bits(const ClusterShape& shape, SizeMode mode, const ShapeSizeModel& model) {
  return shape_size_bits(geometry::kind_of(shape), vertex_count(shape), mode, model);
}

double shape_size_bytes(const ClusterShape& shape, SizeMode mode, const ShapeSizeModel& model) {
  return static_cast<double>(shape_size_bits(shape, mode, model)) / 8.0;
}

Accuracy cluster_accuracy(const ClusterShape& shape, std::span<const VruId> members,
                          std::span<const VruState> frame_states, UnderShape under,
                          const geometry::FootprintDims& dims) {
  Accuracy acc;
  for (const auto& s : frame_states) {
    const bool inside = under == UnderShape::kCenter
                            ? geometry::contains(shape, s.position)
                            : geometry::intersects(shape, geometry::footprint_corners(s, dims));
    if (!inside) continue;
    ++acc.under;
    if (std::binary_search(members.begin(), members.end(), s.id)) ++acc.correct;
  }
  return acc;
}

double cadi(const ClusterShape& shape, std::size_t n_members, SizeMode mode, const ShapeSizeModel& model) {
  if (n_members == 0) throw InvalidInputError("cadi: cluster has no members");
  return static_cast<double>(shape_size_bits(shape, mode, model)) * geometry::area(shape) /
         static_cast<double>(n_members);
}

int adaptive_priority(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kRectangle: return 0;
    case ShapeKind::kCircle: return 1;
    case ShapeKind::kEllipse: return 2;
    case ShapeKind::kPolygon: return 3;
  }
  return 4;
}

const ShapeEvaluation& select_adaptive(std::span<const ShapeEvaluation> evaluations) {
  if (evaluations.empty()) throw InvalidInputError("select_adaptive: no shape evaluations");
  const ShapeEvaluation* best = &evaluations.front();
  for (const auto& e : evaluations.subspan(1)) {
    const auto by_ca = e.ca <=> best->ca;
    if (by_ca > 0 ||
        (by_ca == 0 && (e.cadi < best->cadi ||
                        (e.cadi == best->cadi && adaptive_priority(e.kind) < adaptive_priority(best->kind))))) {
      best = &e;
    }
  }
  return *best;
}

std::vector<Point2D> enclosure_points(std::span<const VruState> members, const EvalOptions& options) {
  std::vector<Point2D> pts;
  for (const auto& s : members) {
    if (options.enclosure == Enclosure::kCenters) {
      pts.push_back(s.position);
    } else {
      const auto corners = geometry::footprint_corners(s, options.dims);
      pts.insert(pts.end(), corners.begin(), corners.end());
    }
  }
  return pts;
}

ShapeEvaluation evaluate_shape(const geometry::FitResult& fit, std::span<const VruId> members,
                               std::span<const VruState> frame_states, const EvalOptions& options) {
  ShapeEvaluation ev;
  ev.shape = fit.shape;
  ev.kind = geometry::kind_of(fit.shape);
  ev.degenerate_fallback = fit.degenerate_fallback;
  ev.n_members = members.size();
  ev.ca = cluster_accuracy(fit.shape, members, frame_states, options.under, options.dims);
  ev.n_under_shape = ev.ca.under;
  ev.size_bits = shape_size_bits(fit.shape, options.mode, options.sizes);
  ev.area = geometry::area(fit.shape);
  ev.cadi = cadi(fit.shape, members.size(), options.mode, options.sizes);
  return ev;
}

std::vector<ShapeEvaluation> evaluate_cluster(std::span<const VruId> members,
                                              std::span<const VruState> frame_states,
                                              const EvalOptions& options) {
  std::vector<VruState> member_states;
  for (const auto id : members) {
    const auto it = std::find_if(frame_states.begin(), frame_states.end(),
                                 [&](const VruState& s) { return s.id == id; });
    if (it == frame_states.end()) {
      std::ostringstream os;
      os << "cluster member " << id << " is not in the frame";
      throw InvalidInputError(os.str());
    }
    member_states.push_back(*it);
  }
  const auto pts = enclosure_points(member_states, options);
  std::vector<ShapeEvaluation> out;
  for (const auto kind : geometry::kAllShapeKinds) {
    const auto fit = geometry::fit_shape(kind, pts, options.seed, options.ellipse_tolerance);
    out.push_back(evaluate_shape(fit, members, frame_states, options));
  }
  return out;
}

}  // namespace vrucp::metrics
