#ifndef VRUCP_SIMULATOR_HPP_
#define VRUCP_SIMULATOR_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vrucp/clustering.hpp"
#include "vrucp/cpm.hpp"
#include "vrucp/metrics.hpp"
#include "vrucp/trajectory_io.hpp"

namespace vrucp::sim {

enum class Generation {
  kFixedRate,       // one CPM round per tick
  kEventTriggered,  // ticks plus an extra round whenever a new VRU shows up
};

std::string_view to_string(Generation g);
Generation generation_from_string(std::string_view name);

struct SimConfig {
  clustering::ClusterParams cluster;
  std::vector<cpm::Policy> policies{cpm::kAllPolicies.begin(), cpm::kAllPolicies.end()};
  cpm::CpmSizeModel cpm;
  double rate = 2.0;  // Hz
  geometry::FootprintDims dims;
  metrics::UnderShape under = metrics::UnderShape::kCenter;
  metrics::Enclosure enclosure = metrics::Enclosure::kCorners;
  double ellipse_tolerance = geometry::kDefaultEllipseTolerance;
  std::uint64_t seed = 0;
  Generation generation = Generation::kFixedRate;
  bool enforce_byte_bound = true;

  /// Throws InvalidInputError / ConfigError for unusable settings, including
  /// a size model that breaks the cluster byte bound (unless disabled).
  void validate() const;
};

nlohmann::json to_json(const SimConfig& config);

/// Evaluation of one shape for one active cluster at one tick.
struct ShapeRecord {
  double tick = 0.0;
  std::int64_t cluster_id = 0;
  std::size_t n_members = 0;
  geometry::ShapeKind kind = geometry::ShapeKind::kCircle;
  metrics::Accuracy ca;
  double cadi = 0.0;
  double area = 0.0;
  std::int64_t size_bits = 0;
  bool chosen_by_adaptive = false;
  bool degenerate_fallback = false;
};

struct SecondBin {
  std::int64_t second = 0;
  std::int64_t bytes = 0;
  std::size_t messages = 0;
};

struct PolicyResult {
  cpm::Policy policy = cpm::Policy::kNoCluster;
  std::vector<SecondBin> series;  // every second from the first to the last tick
  std::size_t message_count = 0;
  std::int64_t total_bytes = 0;
};

struct SimReport {
  SimConfig config;
  std::string dataset_hash;
  std::vector<double> generation_times;
  std::vector<clustering::Cluster> clusters;
  clustering::ClusterSizeStats cluster_stats;
  std::vector<PolicyResult> policies;  // in config order
  std::vector<ShapeRecord> evaluations;
  // cluster size -> shape kind -> times chosen by the adaptive policy
  std::map<std::size_t, std::map<geometry::ShapeKind, std::size_t>> adaptive_choices;
};

/// Clusters the table offline, then generates CPMs at the configured rate for
/// every policy and bins their bytes by whole seconds. Deterministic for a
/// given table and config. Errors from the per-tick work carry the tick time.
SimReport run_simulation(const io::TrajectoryTable& table, const SimConfig& config);
/// Same, with clusters computed elsewhere.
SimReport run_simulation(const io::TrajectoryTable& table, std::vector<clustering::Cluster> clusters,
                         const SimConfig& config);

struct Quartiles {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Linear-interpolation quantiles (the common "type 7" rule). All zero for
/// an empty sample.
Quartiles quartiles(std::vector<double> sample);

/// Spearman rank correlation with average ranks for ties. nullopt for fewer
/// than two points or a constant variable.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct PolicySummary {
  cpm::Policy policy = cpm::Policy::kNoCluster;
  Quartiles bytes_per_second;
  std::size_t message_count = 0;
  std::optional<double> reduction;  // 1 - median / median(no-cluster)
};

struct Summary {
  std::vector<PolicySummary> rows;
  /// Rank correlation between cluster size and how often the adaptive policy
  /// picks a rectangle at that size.
  std::optional<double> rectangle_share_trend;
};

Summary summarize(const SimReport& report);
std::optional<double> rectangle_share_trend(const SimReport& report);

nlohmann::json to_json(const Summary& summary);
nlohmann::json to_json(const SimReport& report);
/// second,bytes,message_count
void write_series_csv(const PolicyResult& result, std::ostream& out);
/// Human-readable summary table.
void print_summary(const Summary& summary, std::ostream& out);

}  // namespace vrucp::sim

#endif  // VRUCP_SIMULATOR_HPP_
