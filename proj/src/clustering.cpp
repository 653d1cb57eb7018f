#include "vrucp/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include "vrucp/errors.hpp"

namespace vrucp::clustering {

namespace {

// Neighborhoods and core flags of one frame, states sorted by id.
struct FrameGraph {
  std::vector<VruState> states;
  std::vector<std::vector<std::size_t>> neighbors;  // excludes self
  std::vector<bool> core;
  std::vector<std::optional<std::size_t>> cluster;  // canonical cluster index
};

FrameGraph build_graph(std::span<const VruState> input, const ClusterParams& params) {
  params.validate();
  FrameGraph g;
  g.states.assign(input.begin(), input.end());
  if (g.states.empty()) return g;
  for (const auto& s : g.states) {
    if (s.timestamp != g.states.front().timestamp) {
      throw InvalidInputError("dbscan_frame: states span more than one timestamp");
    }
    if (!is_finite(s.position)) throw InvalidInputError("dbscan_frame: non-finite position");
  }
  std::sort(g.states.begin(), g.states.end(),
            [](const VruState& a, const VruState& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < g.states.size(); ++i) {
    if (g.states[i].id == g.states[i - 1].id) {
      std::ostringstream os;
      os << "dbscan_frame: VRU " << g.states[i].id << " appears twice";
      throw InvalidInputError(os.str());
    }
  }

  // Uniform grid with cell size e; neighbors live in the 3x3 block.
  const std::size_t n = g.states.size();
  auto cell_of = [&](Point2D p) {
    return std::pair<std::int64_t, std::int64_t>{static_cast<std::int64_t>(std::floor(p.x / params.e)),
                                                 static_cast<std::int64_t>(std::floor(p.y / params.e))};
  };
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < n; ++i) grid[cell_of(g.states[i].position)].push_back(i);

  g.neighbors.resize(n);
  g.core.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [cx, cy] = cell_of(g.states[i].position);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = grid.find({cx + dx, cy + dy});
        if (it == grid.end()) continue;
        for (const auto j : it->second) {
          if (j != i && distance(g.states[i].position, g.states[j].position) <= params.e) {
            g.neighbors[i].push_back(j);
          }
        }
      }
    }
    std::sort(g.neighbors[i].begin(), g.neighbors[i].end());
    g.core[i] = g.neighbors[i].size() + 1 >= params.min_pts;
  }

  // Clusters are opened in id order, so a contested border point goes to the
  // cluster whose lowest core id is smallest.
  g.cluster.assign(n, std::nullopt);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.core[i] || g.cluster[i]) continue;
    const std::size_t label = next++;
    std::deque<std::size_t> queue{i};
    g.cluster[i] = label;
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      for (const auto q : g.neighbors[p]) {
        if (g.cluster[q]) continue;
        g.cluster[q] = label;
        if (g.core[q]) queue.push_back(q);
      }
    }
  }
  return g;
}

}  // namespace

void ClusterParams::validate() const {
  if (!(std::isfinite(e) && e > 0.0)) throw InvalidInputError("cluster params: e must be positive");
  if (!(r > 0.0 && r <= 1.0)) throw InvalidInputError("cluster params: r must lie in (0, 1]");
  if (min_pts < 2) throw InvalidInputError("cluster params: min_pts must be at least 2");
}

FrameClustering dbscan_frame(std::span<const VruState> states, const ClusterParams& params) {
  const FrameGraph g = build_graph(states, params);
  FrameClustering out;
  if (!g.states.empty()) out.timestamp = g.states.front().timestamp;
  std::map<std::size_t, VruId> lowest;
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    if (g.cluster[i]) lowest.try_emplace(*g.cluster[i], g.states[i].id);
  }
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    out.assignments[g.states[i].id] =
        g.cluster[i] ? std::optional<VruId>(lowest.at(*g.cluster[i])) : std::nullopt;
  }
  return out;
}

std::map<VruId, MemberSet> seeded_candidates(std::span<const VruState> states,
                                             const ClusterParams& params) {
  const FrameGraph g = build_graph(states, params);
  const std::size_t n = g.states.size();
  std::map<std::size_t, MemberSet> canonical;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.cluster[i]) canonical[*g.cluster[i]].push_back(g.states[i].id);
  }

  std::map<VruId, MemberSet> out;
  std::vector<bool> seen(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (!g.cluster[s]) continue;
    if (!g.core[s]) {
      out[g.states[s].id] = canonical.at(*g.cluster[s]);
      continue;
    }
    std::fill(seen.begin(), seen.end(), false);
    std::deque<std::size_t> queue{s};
    seen[s] = true;
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      for (const auto q : g.neighbors[p]) {
        if (seen[q]) continue;
        seen[q] = true;
        if (g.core[q]) queue.push_back(q);
      }
    }
    MemberSet members;
    for (std::size_t i = 0; i < n; ++i) {
      if (seen[i]) members.push_back(g.states[i].id);
    }
    out[g.states[s].id] = std::move(members);
  }
  return out;
}

std::map<MemberSet, std::vector<double>> symmetric_groups(const CandidateRecord& record) {
  std::set<MemberSet> groups;
  for (const auto& [seed, by_group] : record) {
    for (const auto& [group, _] : by_group) groups.insert(group);
  }
  std::map<MemberSet, std::vector<double>> out;
  for (const auto& group : groups) {
    std::vector<double> common;
    bool first = true;
    for (const auto member : group) {
      const auto seed_it = record.find(member);
      if (seed_it == record.end()) {
        common.clear();
        break;
      }
      const auto group_it = seed_it->second.find(group);
      if (group_it == seed_it->second.end()) {
        common.clear();
        break;
      }
      std::vector<double> times = group_it->second;
      std::sort(times.begin(), times.end());
      if (first) {
        common = std::move(times);
        first = false;
      } else {
        std::vector<double> both;
        std::set_intersection(common.begin(), common.end(), times.begin(), times.end(),
                              std::back_inserter(both));
        common = std::move(both);
      }
      if (common.empty()) break;
    }
    if (!common.empty()) out.emplace(group, std::move(common));
  }
  return out;
}

double coexistence_ratio(const MemberSet& members, const io::TrajectoryTable& table,
                         std::span<const double> clustered_timestamps) {
  std::set<double> present;
  for (const auto id : members) {
    if (!table.has(id)) {
      std::ostringstream os;
      os << "coexistence_ratio: VRU " << id << " is not in the trajectory table";
      throw InvalidInputError(os.str());
    }
    const auto times = table.presence(id);
    present.insert(times.begin(), times.end());
  }
  if (present.empty()) throw InvalidInputError("coexistence_ratio: members have no observations");
  const std::set<double> clustered(clustered_timestamps.begin(), clustered_timestamps.end());
  for (const double t : clustered) {
    if (!present.count(t)) {
      throw InvalidInputError("coexistence_ratio: clustered timestamp outside the members' lifetimes");
    }
  }
  return static_cast<double>(clustered.size()) / static_cast<double>(present.size());
}

bool Cluster::active_at(double t) const {
  return std::binary_search(active_window.begin(), active_window.end(), t);
}

bool Cluster::has_member(VruId id) const {
  return std::binary_search(members.begin(), members.end(), id);
}

std::vector<Cluster> time_sequence_clusters(const io::TrajectoryTable& table,
                                            const ClusterParams& params) {
  params.validate();
  CandidateRecord record;
  for (const double t : table.timestamps()) {
    for (auto& [seed, members] : seeded_candidates(table.frame(t), params)) {
      record[seed][std::move(members)].push_back(t);
    }
  }

  const auto& grid = table.timestamps();
  auto frame_index = [&](double t) {
    return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), t) - grid.begin());
  };

  std::vector<Cluster> clusters;
  for (auto& [members, times] : symmetric_groups(record)) {
    const double ratio = coexistence_ratio(members, table, times);
    if (ratio < params.r) continue;
    // One cluster per run of consecutive frames.
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= times.size(); ++i) {
      if (i < times.size() && frame_index(times[i]) == frame_index(times[i - 1]) + 1) continue;
      Cluster c;
      c.members = members;
      c.active_window.assign(times.begin() + static_cast<std::ptrdiff_t>(begin),
                             times.begin() + static_cast<std::ptrdiff_t>(i));
      c.coexistence = ratio;
      clusters.push_back(std::move(c));
      begin = i;
    }
  }

  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.active_window.front() != b.active_window.front()) {
      return a.active_window.front() < b.active_window.front();
    }
    return a.members < b.members;
  });
  const auto ids = table.vru_ids();
  std::int64_t next = ids.empty() ? 1 : ids.back().value + 1;
  for (auto& c : clusters) c.id = next++;
  return clusters;
}

ClusterSizeStats cluster_size_pdf(std::span<const Cluster> clusters, const io::TrajectoryTable& table) {
  ClusterSizeStats stats;
  stats.instances = table.size();
  std::size_t clustered_instances = 0;
  std::size_t cluster_frames = 0;
  std::set<VruId> ever_clustered;
  for (const auto& c : clusters) {
    stats.counts[c.members.size()] += c.active_window.size();
    cluster_frames += c.active_window.size();
    clustered_instances += c.members.size() * c.active_window.size();
    ever_clustered.insert(c.members.begin(), c.members.end());
  }
  for (const auto& [size, count] : stats.counts) {
    stats.pdf[size] = static_cast<double>(count) / static_cast<double>(cluster_frames);
  }
  if (stats.instances > 0) {
    stats.unclustered_fraction =
        1.0 - static_cast<double>(clustered_instances) / static_cast<double>(stats.instances);
    const auto all = table.vru_ids().size();
    stats.unclustered_vru_fraction =
        static_cast<double>(all - ever_clustered.size()) / static_cast<double>(all);
  }
  return stats;
}

}  // namespace vrucp::clustering
