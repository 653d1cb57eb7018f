#include "vrucp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "vrucp/errors.hpp"

namespace vrucp::sim {

namespace {

struct Event {
  double time = 0.0;
  std::vector<VruState> states;  // ordered by id
};

std::vector<Event> generation_events(const io::TrajectoryTable& table, const SimConfig& config) {
  std::vector<Event> events;
  for (auto& tick : io::resample_ticks(table, config.rate)) events.push_back({tick.time, std::move(tick.states)});
  if (config.generation == Generation::kEventTriggered) {
    std::set<double> tick_times;
    for (const auto& e : events) tick_times.insert(e.time);
    std::set<double> arrivals;
    for (const auto id : table.vru_ids()) arrivals.insert(table.presence(id).front());
    for (const double t : arrivals) {
      if (tick_times.count(t)) continue;
      const auto frame = table.frame(t);
      events.push_back({t, {frame.begin(), frame.end()}});
    }
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
  }
  return events;
}

template <class Fn>
void with_tick_context(double t, Fn&& fn) {
  auto context = [t](const std::exception& e) {
    std::ostringstream os;
    os << "tick t=" << t << ": " << e.what();
    return os.str();
  };
  try {
    fn();
  } catch (const NumericalError& e) {
    throw NumericalError(context(e), e.iterations());
  } catch (const DegenerateInputError& e) {
    throw DegenerateInputError(context(e));
  } catch (const InvalidInputError& e) {
    throw InvalidInputError(context(e));
  }
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

nlohmann::json quartiles_json(const Quartiles& q) {
  return {{"min", q.min}, {"q1", q.q1}, {"median", q.median}, {"q3", q.q3}, {"max", q.max}};
}

}  // namespace

std::string_view to_string(Generation g) {
  return g == Generation::kFixedRate ? "fixed" : "event";
}

Generation generation_from_string(std::string_view name) {
  if (name == "fixed") return Generation::kFixedRate;
  if (name == "event") return Generation::kEventTriggered;
  throw InvalidInputError("unknown generation mode '" + std::string(name) + "' (expected fixed or event)");
}

void SimConfig::validate() const {
  try {
    cluster.validate();
  } catch (const InvalidInputError& e) {
    throw ConfigError(e.what());
  }
  if (policies.empty()) throw ConfigError("at least one policy is required");
  std::set<cpm::Policy> unique(policies.begin(), policies.end());
  if (unique.size() != policies.size()) throw ConfigError("policies are listed more than once");
  if (!(std::isfinite(rate) && rate > 0.0)) throw ConfigError("generation rate must be positive");
  if (!(dims.width > 0.0 && dims.depth > 0.0)) throw ConfigError("footprint width and depth must be positive");
  if (!(ellipse_tolerance > 0.0 && ellipse_tolerance < 1.0)) throw ConfigError("ellipse tolerance must lie in (0, 1)");
  cpm.validate();
  if (enforce_byte_bound) cpm::check_byte_bound(cpm, policies, enclosure);
}

nlohmann::json to_json(const SimConfig& c) {
  nlohmann::json policies = nlohmann::json::array();
  for (const auto p : c.policies) policies.push_back(std::string(cpm::to_string(p)));
  const auto& s = c.cpm.shapes;
  return {
      {"e", c.cluster.e},
      {"r", c.cluster.r},
      {"min_pts", c.cluster.min_pts},
      {"policies", policies},
      {"rate", c.rate},
      {"mode", std::string(metrics::to_string(c.cpm.mode))},
      {"seed", c.seed},
      {"footprint_width", c.dims.width},
      {"footprint_depth", c.dims.depth},
      {"under_shape", std::string(metrics::to_string(c.under))},
      {"enclosure", std::string(metrics::to_string(c.enclosure))},
      {"ellipse_tolerance", c.ellipse_tolerance},
      {"generation", std::string(to_string(c.generation))},
      {"enforce_byte_bound", c.enforce_byte_bound},
      {"cpm_base_bytes", c.cpm.base_bytes},
      {"cpm_vru_object_bytes", c.cpm.vru_object_bytes},
      {"cpm_cluster_object_base_bytes", c.cpm.cluster_object_base_bytes},
      {"shape_bits",
       {{"circle_full", s.circle_full_bits},
        {"circle_compulsory", s.circle_compulsory_bits},
        {"ellipse_full", s.ellipse_full_bits},
        {"ellipse_compulsory", s.ellipse_compulsory_bits},
        {"rectangle_full", s.rectangle_full_bits},
        {"rectangle_compulsory", s.rectangle_compulsory_bits},
        {"polygon_full_base", s.polygon_full_base_bits},
        {"polygon_full_point", s.polygon_full_point_bits},
        {"polygon_compulsory_base", s.polygon_compulsory_base_bits},
        {"polygon_compulsory_point", s.polygon_compulsory_point_bits}}},
  };
}

SimReport run_simulation(const io::TrajectoryTable& table, const SimConfig& config) {
  config.validate();
  auto clusters = table.empty() ? std::vector<clustering::Cluster>{}
                                : clustering::time_sequence_clusters(table, config.cluster);
  return run_simulation(table, std::move(clusters), config);
}

SimReport run_simulation(const io::TrajectoryTable& table, std::vector<clustering::Cluster> clusters,
                         const SimConfig& config) {
  config.validate();
  SimReport report;
  report.config = config;
  report.dataset_hash = io::content_hash(table);
  std::sort(clusters.begin(), clusters.end(),
            [](const clustering::Cluster& a, const clustering::Cluster& b) { return a.id < b.id; });
  report.clusters = std::move(clusters);
  report.cluster_stats = clustering::cluster_size_pdf(report.clusters, table);
  for (const auto p : config.policies) report.policies.push_back(PolicyResult{p, {}, 0, 0});
  if (table.empty()) return report;

  const auto events = generation_events(table, config);
  const auto first_second = static_cast<std::int64_t>(std::floor(events.front().time));
  const auto last_second = static_cast<std::int64_t>(std::floor(events.back().time));
  for (auto& pr : report.policies) {
    for (std::int64_t s = first_second; s <= last_second; ++s) pr.series.push_back({s, 0, 0});
  }

  metrics::EvalOptions opts;
  opts.mode = config.cpm.mode;
  opts.sizes = config.cpm.shapes;
  opts.under = config.under;
  opts.enclosure = config.enclosure;
  opts.dims = config.dims;
  opts.ellipse_tolerance = config.ellipse_tolerance;

  for (const auto& event : events) {
    report.generation_times.push_back(event.time);
    with_tick_context(event.time, [&] {
      // Clusters whose validated record covers every member's selected state.
      std::map<VruId, const VruState*> by_id;
      for (const auto& s : event.states) by_id.emplace(s.id, &s);
      std::set<VruId> claimed;
      std::vector<const clustering::Cluster*> active;
      for (const auto& c : report.clusters) {
        const bool covered = std::all_of(c.members.begin(), c.members.end(), [&](VruId m) {
          const auto it = by_id.find(m);
          return it != by_id.end() && !claimed.count(m) && c.active_at(it->second->timestamp);
        });
        if (!covered) continue;
        claimed.insert(c.members.begin(), c.members.end());
        active.push_back(&c);
      }

      std::vector<std::vector<metrics::ShapeEvaluation>> evals;
      std::vector<std::size_t> chosen;
      for (const auto* c : active) {
        opts.seed = config.seed + static_cast<std::uint64_t>(c->id);
        evals.push_back(metrics::evaluate_cluster(c->members, event.states, opts));
        const auto& pick = metrics::select_adaptive(evals.back());
        chosen.push_back(static_cast<std::size_t>(&pick - evals.back().data()));
        ++report.adaptive_choices[c->members.size()][pick.kind];
        for (std::size_t k = 0; k < evals.back().size(); ++k) {
          const auto& e = evals.back()[k];
          report.evaluations.push_back({event.time, c->id, c->members.size(), e.kind, e.ca, e.cadi, e.area,
                                        e.size_bits, k == chosen.back(), e.degenerate_fallback});
        }
      }

      const auto bin = static_cast<std::size_t>(static_cast<std::int64_t>(std::floor(event.time)) - first_second);
      for (auto& pr : report.policies) {
        std::vector<cpm::ClusterDescription> descriptions;
        if (pr.policy != cpm::Policy::kNoCluster) {
          const auto kind = cpm::fixed_shape(pr.policy);
          for (std::size_t i = 0; i < active.size(); ++i) {
            const auto& e = kind ? evals[i][static_cast<std::size_t>(*kind)] : evals[i][chosen[i]];
            descriptions.push_back({active[i]->id, active[i]->members, e.shape});
          }
        }
        const auto msgs = cpm::build_cpms(event.time, event.states, descriptions, pr.policy, config.cpm, config.dims);
        for (const auto& m : msgs) {
          pr.series[bin].bytes += m.total_bytes;
          pr.total_bytes += m.total_bytes;
        }
        pr.series[bin].messages += msgs.size();
        pr.message_count += msgs.size();
      }
    });
  }
  return report;
}

Quartiles quartiles(std::vector<double> sample) {
  Quartiles q;
  if (sample.empty()) return q;
  std::sort(sample.begin(), sample.end());
  auto at = [&](double p) {
    const double h = (static_cast<double>(sample.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sample.size() - 1);
    return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
  };
  q.min = sample.front();
  q.q1 = at(0.25);
  q.median = at(0.5);
  q.q3 = at(0.75);
  q.max = sample.back();
  return q;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInputError("spearman: samples differ in length");
  if (x.size() < 2) return std::nullopt;
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::optional<double> rectangle_share_trend(const SimReport& report) {
  std::vector<double> sizes, shares;
  for (const auto& [size, by_kind] : report.adaptive_choices) {
    std::size_t all = 0;
    for (const auto& [kind, count] : by_kind) all += count;
    if (all == 0) continue;
    const auto it = by_kind.find(geometry::ShapeKind::kRectangle);
    sizes.push_back(static_cast<double>(size));
    shares.push_back(it == by_kind.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(all));
  }
  return spearman(sizes, shares);
}

Summary summarize(const SimReport& report) {
  Summary out;
  std::optional<double> baseline;
  for (const auto& pr : report.policies) {
    PolicySummary row;
    row.policy = pr.policy;
    std::vector<double> bytes;
    for (const auto& b : pr.series) bytes.push_back(static_cast<double>(b.bytes));
    row.bytes_per_second = quartiles(std::move(bytes));
    row.message_count = pr.message_count;
    if (pr.policy == cpm::Policy::kNoCluster) baseline = row.bytes_per_second.median;
    out.rows.push_back(row);
  }
  if (baseline && *baseline > 0) {
    for (auto& row : out.rows) {
      if (row.policy != cpm::Policy::kNoCluster) row.reduction = 1.0 - row.bytes_per_second.median / *baseline;
    }
  }
  out.rectangle_share_trend = rectangle_share_trend(report);
  return out;
}

nlohmann::json to_json(const Summary& summary) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : summary.rows) {
    rows.push_back({{"policy", std::string(cpm::to_string(r.policy))},
                    {"bytes_per_second", quartiles_json(r.bytes_per_second)},
                    {"message_count", r.message_count},
                    {"reduction", r.reduction ? nlohmann::json(*r.reduction) : nlohmann::json(nullptr)}});
  }
  return {{"policies", rows},
          {"rectangle_share_trend",
           summary.rectangle_share_trend ? nlohmann::json(*summary.rectangle_share_trend) : nlohmann::json(nullptr)}};
}

nlohmann::json to_json(const SimReport& report) {
  nlohmann::json j;
  j["provenance"] = {{"dataset_hash", report.dataset_hash}, {"config", to_json(report.config)}};
  j["generation_events"] = report.generation_times.size();

  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : report.clusters) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto m : c.members) members.push_back(m.value);
    clusters.push_back({{"id", c.id},
                        {"members", members},
                        {"first", c.active_window.front()},
                        {"last", c.active_window.back()},
                        {"frames", c.active_window.size()},
                        {"coexistence", c.coexistence}});
  }
  j["clusters"] = std::move(clusters);

  nlohmann::json pdf = nlohmann::json::object();
  for (const auto& [size, p] : report.cluster_stats.pdf) pdf[std::to_string(size)] = p;
  j["cluster_size_pdf"] = std::move(pdf);
  j["unclustered_fraction"] = report.cluster_stats.unclustered_fraction;
  j["unclustered_vru_fraction"] = report.cluster_stats.unclustered_vru_fraction;

  const auto summary = summarize(report);
  nlohmann::json policies = nlohmann::json::array();
  for (std::size_t i = 0; i < report.policies.size(); ++i) {
    const auto& pr = report.policies[i];
    nlohmann::json series = nlohmann::json::array();
    for (const auto& b : pr.series) series.push_back({b.second, b.bytes, b.messages});
    const auto& row = summary.rows[i];
    policies.push_back({{"policy", std::string(cpm::to_string(pr.policy))},
                        {"message_count", pr.message_count},
                        {"total_bytes", pr.total_bytes},
                        {"bytes_per_second", quartiles_json(row.bytes_per_second)},
                        {"reduction", row.reduction ? nlohmann::json(*row.reduction) : nlohmann::json(nullptr)},
                        {"series_columns", {"second", "bytes", "messages"}},
                        {"series", std::move(series)}});
  }
  j["policies"] = std::move(policies);

  nlohmann::json choices = nlohmann::json::object();
  for (const auto& [size, by_kind] : report.adaptive_choices) {
    nlohmann::json row = nlohmann::json::object();
    for (const auto kind : geometry::kAllShapeKinds) {
      const auto it = by_kind.find(kind);
      row[std::string(geometry::to_string(kind))] = it == by_kind.end() ? 0 : it->second;
    }
    choices[std::to_string(size)] = std::move(row);
  }
  j["adaptive_choices"] = std::move(choices);
  j["rectangle_share_trend"] =
      summary.rectangle_share_trend ? nlohmann::json(*summary.rectangle_share_trend) : nlohmann::json(nullptr);

  nlohmann::json evals = nlohmann::json::array();
  for (const auto& e : report.evaluations) {
    evals.push_back({e.tick, e.cluster_id, e.n_members, std::string(geometry::to_string(e.kind)), e.ca.correct,
                     e.ca.under, e.cadi, e.area, e.size_bits, e.chosen_by_adaptive, e.degenerate_fallback});
  }
  j["evaluation_columns"] = {"tick",   "cluster_id", "n_members", "shape_kind", "ca_correct",         "ca_under",
                             "cadi",   "area",       "size_bits", "chosen_by_adaptive", "degenerate_fallback"};
  j["evaluations"] = std::move(evals);
  return j;
}

void write_series_csv(const PolicyResult& result, std::ostream& out) {
  out << "second,bytes,message_count\n";
  for (const auto& b : result.series) out << b.second << ',' << b.bytes << ',' << b.messages << '\n';
}

void print_summary(const Summary& summary, std::ostream& out) {
  out << std::left << std::setw(12) << "policy" << std::right << std::setw(10) << "median" << std::setw(10) << "q1"
      << std::setw(10) << "q3" << std::setw(10) << "min" << std::setw(10) << "max" << std::setw(10) << "messages"
      << std::setw(11) << "reduction" << '\n';
  out << std::fixed << std::setprecision(1);
  for (const auto& r : summary.rows) {
    const auto& q = r.bytes_per_second;
    out << std::left << std::setw(12) << cpm::to_string(r.policy) << std::right << std::setw(10) << q.median
        << std::setw(10) << q.q1 << std::setw(10) << q.q3 << std::setw(10) << q.min << std::setw(10) << q.max
        << std::setw(10) << r.message_count;
    if (r.reduction) {
      std::ostringstream pct;
      pct << std::fixed << std::setprecision(1) << 100.0 * *r.reduction << '%';
      out << std::setw(11) << pct.str();
    } else {
      out << std::setw(11) << "-";
    }
    out << '\n';
  }
  out << std::defaultfloat;
  if (summary.rectangle_share_trend) {
    out << "rectangle share vs cluster size (Spearman): " << std::setprecision(3) << *summary.rectangle_share_trend
        << '\n';
  }
}

}  // namespace vrucp::sim
