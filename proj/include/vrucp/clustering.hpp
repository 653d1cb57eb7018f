#ifndef VRUCP_CLUSTERING_HPP_
#define VRUCP_CLUSTERING_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "vrucp/trajectory_io.hpp"
#include "vrucp/types.hpp"

namespace vrucp::clustering {

struct ClusterParams {
  double e = 1.5;  // DBSCAN neighborhood radius, meters
  double r = 0.7;  // minimum coexistence ratio
  std::size_t min_pts = 2;

  /// Throws InvalidInputError unless e > 0, 0 < r <= 1 and min_pts >= 2.
  void validate() const;
};

/// Sorted, duplicate-free set of VRU ids.
using MemberSet = std::vector<VruId>;

/// Per-frame DBSCAN result. A clustered VRU maps to the lowest id of its
/// cluster; noise maps to nullopt.
struct FrameClustering {
  double timestamp = 0.0;
  std::map<VruId, std::optional<VruId>> assignments;
};

/// Standard DBSCAN over positions (neighborhood `dist <= e`, counting the
/// point itself). Border points reachable from several clusters join the one
/// whose lowest core id is smallest, so the result does not depend on input
/// order. Throws InvalidInputError for mixed timestamps or repeated ids.
FrameClustering dbscan_frame(std::span<const VruState> states, const ClusterParams& params);

/// Candidate group of every clustered VRU in one frame, computed as a DBSCAN
/// expansion that starts at that VRU: a core seed takes its core component
/// plus every border point next to it; a border seed takes its frame cluster.
std::map<VruId, MemberSet> seeded_candidates(std::span<const VruState> states,
                                             const ClusterParams& params);

/// Candidate groups observed per seed, with the timestamps at which the seed
/// produced each group.
using CandidateRecord = std::map<VruId, std::map<MemberSet, std::vector<double>>>;

/// Keeps each group only at the timestamps where every one of its members,
/// taken as the seed, produced exactly that group. Groups left with no
/// timestamps are dropped.
std::map<MemberSet, std::vector<double>> symmetric_groups(const CandidateRecord& record);

/// |clustered| / |union of the members' observation timestamps|. Throws
/// InvalidInputError for unknown members, an empty union, or clustered
/// timestamps outside the union.
double coexistence_ratio(const MemberSet& members, const io::TrajectoryTable& table,
                         std::span<const double> clustered_timestamps);

/// One validated group over a contiguous run of frames. Any membership change
/// ends the run; the same members reappearing later get a new id.
struct Cluster {
  std::int64_t id = 0;
  MemberSet members;
  std::vector<double> active_window;  // ascending frame timestamps
  double coexistence = 0.0;           // ratio of the whole group, all runs

  bool active_at(double t) const;
  bool has_member(VruId id) const;
};

/// Time-sequence DBSCAN over the whole table. Cluster ids start above the
/// largest VRU id so both can share one object-id space.
std::vector<Cluster> time_sequence_clusters(const io::TrajectoryTable& table,
                                            const ClusterParams& params);

struct ClusterSizeStats {
  std::map<std::size_t, std::size_t> counts;  // cluster size -> cluster-frame count
  std::map<std::size_t, double> pdf;          // normalized counts; singletons excluded
  double unclustered_fraction = 0.0;          // VRU-frame instances outside any cluster
  double unclustered_vru_fraction = 0.0;      // VRUs never part of any cluster
  std::size_t instances = 0;                  // all VRU-frame instances
};

ClusterSizeStats cluster_size_pdf(std::span<const Cluster> clusters, const io::TrajectoryTable& table);

}  // namespace vrucp::clustering

#endif  // VRUCP_CLUSTERING_HPP_
