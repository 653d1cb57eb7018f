#ifndef VRUCP_TRAJECTORY_IO_HPP_
#define VRUCP_TRAJECTORY_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vrucp/types.hpp"

namespace vrucp::io {

/// Immutable, validated set of VRU observations. States are kept sorted by
/// (timestamp, id); per-VRU timestamps are strictly increasing.
class TrajectoryTable {
public:
  TrajectoryTable() = default;

  /// Validates and sorts. Throws DataError naming every VRU whose timestamps
  /// are not strictly increasing in input order, or InvalidInputError for
  /// non-finite values or a non-positive frame rate.
  static TrajectoryTable from_states(std::vector<VruState> states, double frame_rate);

  double frame_rate() const { return frame_rate_; }
  bool empty() const { return states_.empty(); }
  std::size_t size() const { return states_.size(); }

  /// All states ordered by (timestamp, id).
  std::span<const VruState> states() const { return states_; }
  /// Distinct timestamps in ascending order.
  const std::vector<double>& timestamps() const { return timestamps_; }
  /// States observed at exactly `t`, ordered by id. Empty if none.
  std::span<const VruState> frame(double t) const;
  std::vector<VruId> vru_ids() const;
  /// States of one VRU ordered by time. Empty if unknown.
  std::vector<VruState> track(VruId id) const;
  /// Timestamps at which `id` is observed.
  std::vector<double> presence(VruId id) const;
  bool has(VruId id) const { return tracks_.count(id) > 0; }

  friend bool operator==(const TrajectoryTable& a, const TrajectoryTable& b) {
    return a.frame_rate_ == b.frame_rate_ && a.states_ == b.states_;
  }

private:
  double frame_rate_ = 1.0;
  std::vector<VruState> states_;
  std::vector<double> timestamps_;
  std::vector<std::size_t> frame_begin_;  // index into states_ per timestamp, plus end
  std::map<VruId, std::vector<std::size_t>> tracks_;
};

enum class TimeColumn { kSeconds, kFrame };
enum class AngleUnit { kRadians, kDegrees };

/// Column mapping and unit conversions for a trajectory CSV. Normally read
/// from a `key = value` sidecar file next to the data.
struct LoaderOptions {
  std::string id_column = "vru_id";
  std::string time_column = "time";
  std::string x_column = "x";
  std::string y_column = "y";
  std::string speed_column = "speed";
  std::string heading_column = "heading";
  TimeColumn time_kind = TimeColumn::kSeconds;
  std::optional<double> frame_rate;  // Hz; inferred from timestamps when unset
  double position_scale = 1.0;       // source units -> meters
  double speed_scale = 1.0;          // source units -> m/s
  AngleUnit heading_unit = AngleUnit::kRadians;
};

/// Parses a sidecar file. Recognized keys: column.vru_id, column.time,
/// column.x, column.y, column.speed, column.heading, time.kind
/// (seconds|frame), frame_rate, position_scale, speed_scale, heading_unit
/// (rad|deg). Unknown keys are a SchemaError.
LoaderOptions read_sidecar(const std::filesystem::path& path);
LoaderOptions parse_sidecar(std::istream& in);

/// Sidecar location used when none is given explicitly: `<input>.sidecar`.
std::filesystem::path default_sidecar_path(const std::filesystem::path& input);

/// Loads a trajectory CSV (header row required). The speed and heading
/// columns are optional; a missing or empty heading is reconstructed from
/// neighboring positions and flagged. Throws SchemaError for missing required
/// columns and DataError (with 1-based row numbers) for malformed rows.
TrajectoryTable load_trajectories(std::istream& in, const LoaderOptions& options = {});
TrajectoryTable load_trajectories(const std::filesystem::path& path, const LoaderOptions& options);
/// Uses the default sidecar when present.
TrajectoryTable load_trajectories(const std::filesystem::path& path);

/// Writes the native CSV dialect: vru_id,time,x,y,speed,heading,heading_derived.
/// Values are printed in shortest round-trip form, so reloading reproduces the
/// table exactly (frame rate travels in a `# frame_rate=` comment line).
void export_trajectories(const TrajectoryTable& table, std::ostream& out);
void export_trajectories(const TrajectoryTable& table, const std::filesystem::path& path);

/// SHA-256 of the table's native export, hex encoded.
std::string content_hash(const TrajectoryTable& table);

/// States selected for one output tick of a resampling.
struct Tick {
  double time = 0.0;
  std::vector<VruState> states;  // ordered by id; original timestamps kept
};

/// Ticks at t0 + k / rate covering the table. At each tick every VRU
/// contributes its nearest native observation lying within half a native
/// frame period (earlier wins a tie); VRUs without one are omitted.
std::vector<Tick> resample_ticks(const TrajectoryTable& table, double rate);
TrajectoryTable resample(const TrajectoryTable& table, double rate);

struct GroupSpec {
  std::size_t size = 2;
  double spacing = 0.5;     // meters between neighbors, across the walking direction
  Point2D start;            // position of the group's center at start_time
  Point2D velocity{1.0, 0.0};
  double start_time = 0.0;
  double duration = 60.0;
};

struct WalkerSpec {
  Point2D start;
  Point2D velocity{1.0, 0.0};
  double start_time = 0.0;
  double duration = 60.0;
};

struct ScenarioSpec {
  std::vector<GroupSpec> groups;
  std::vector<WalkerSpec> walkers;
  double frame_rate = 23.98;
  double position_noise = 0.0;  // std-dev of per-observation jitter, meters
};

/// Deterministic trajectories: group members walk in lockstep side by side,
/// walkers move alone. Ids are assigned from 1 in spec order.
TrajectoryTable synth_scenario(const ScenarioSpec& spec, std::uint64_t seed);

struct CrowdSpec {
  std::size_t groups = 20;
  std::size_t min_group_size = 2;
  std::size_t max_group_size = 6;
  std::size_t singles = 20;
  double lane_gap = 6.0;  // lateral distance between walking lanes, meters
  double duration = 60.0;
  double frame_rate = 23.98;
};

/// A crowd of groups and single walkers on parallel lanes, with random sizes,
/// speeds, directions and start offsets drawn from `seed`.
ScenarioSpec make_crowd(const CrowdSpec& crowd, std::uint64_t seed);

}  // namespace vrucp::io

#endif  // VRUCP_TRAJECTORY_IO_HPP_
