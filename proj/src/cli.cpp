#include "vrucp/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "vrucp/clustering.hpp"
#include "vrucp/errors.hpp"
#include "vrucp/trajectory_io.hpp"

namespace vrucp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void flatten(const json& j, const std::string& prefix, json& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten(value, name, out);
    } else {
      out[name] = value;
    }
  }
}

const json& field(const json& v, const std::string& key) {
  return v.at(key);
}

double number(const json& v, const std::string& key) {
  const auto& x = field(v, key);
  if (!x.is_number()) throw ConfigError("config '" + key + "' must be a number, got " + x.dump());
  return x.get<double>();
}

std::int64_t integer(const json& v, const std::string& key) {
  const auto& x = field(v, key);
  if (!x.is_number_integer()) throw ConfigError("config '" + key + "' must be an integer, got " + x.dump());
  return x.get<std::int64_t>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& key) {
  const auto& x = field(v, key);
  if (!x.is_number_integer() || x.get<std::int64_t>() < 0) {
    if (!x.is_number_unsigned()) throw ConfigError("config '" + key + "' must be a non-negative integer, got " + x.dump());
  }
  return x.get<std::uint64_t>();
}

std::string text(const json& v, const std::string& key) {
  const auto& x = field(v, key);
  if (!x.is_string()) throw ConfigError("config '" + key + "' must be a string, got " + x.dump());
  return x.get<std::string>();
}

bool boolean(const json& v, const std::string& key) {
  const auto& x = field(v, key);
  if (!x.is_boolean()) throw ConfigError("config '" + key + "' must be true or false, got " + x.dump());
  return x.get<bool>();
}

template <class Fn>
auto as_config_error(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidInputError& e) {
    throw ConfigError("config '" + key + "': " + e.what());
  }
}

std::vector<cpm::Policy> policies_of(const json& v) {
  const auto& x = field(v, "policies");
  std::vector<std::string> names;
  if (x.is_string()) {
    std::stringstream ss(x.get<std::string>());
    for (std::string item; std::getline(ss, item, ',');) {
      if (!item.empty()) names.push_back(item);
    }
  } else if (x.is_array()) {
    for (const auto& item : x) {
      if (!item.is_string()) throw ConfigError("config 'policies' entries must be strings");
      names.push_back(item.get<std::string>());
    }
  } else {
    throw ConfigError("config 'policies' must be a list or a comma-separated string");
  }
  std::vector<cpm::Policy> out;
  for (const auto& n : names) out.push_back(as_config_error("policies", [&] { return cpm::policy_from_string(n); }));
  return out;
}

sim::SimConfig to_sim(const json& v) {
  sim::SimConfig c;
  c.cluster.e = number(v, "e");
  c.cluster.r = number(v, "r");
  const auto min_pts = integer(v, "min_pts");
  if (min_pts < 0) throw ConfigError("config 'min_pts' must not be negative");
  c.cluster.min_pts = static_cast<std::size_t>(min_pts);
  c.policies = policies_of(v);
  c.rate = number(v, "rate");
  c.cpm.mode = as_config_error("mode", [&] { return metrics::size_mode_from_string(text(v, "mode")); });
  c.seed = unsigned_integer(v, "seed");
  c.dims.width = number(v, "footprint_width");
  c.dims.depth = number(v, "footprint_depth");
  c.under = as_config_error("under_shape", [&] { return metrics::under_shape_from_string(text(v, "under_shape")); });
  c.enclosure = as_config_error("enclosure", [&] { return metrics::enclosure_from_string(text(v, "enclosure")); });
  c.ellipse_tolerance = number(v, "ellipse_tolerance");
  c.generation = as_config_error("generation", [&] { return sim::generation_from_string(text(v, "generation")); });
  c.enforce_byte_bound = boolean(v, "enforce_byte_bound");
  c.cpm.base_bytes = integer(v, "cpm_base_bytes");
  c.cpm.vru_object_bytes = integer(v, "cpm_vru_object_bytes");
  c.cpm.cluster_object_base_bytes = integer(v, "cpm_cluster_object_base_bytes");
  auto& s = c.cpm.shapes;
  s.circle_full_bits = integer(v, "shape_bits.circle_full");
  s.circle_compulsory_bits = integer(v, "shape_bits.circle_compulsory");
  s.ellipse_full_bits = integer(v, "shape_bits.ellipse_full");
  s.ellipse_compulsory_bits = integer(v, "shape_bits.ellipse_compulsory");
  s.rectangle_full_bits = integer(v, "shape_bits.rectangle_full");
  s.rectangle_compulsory_bits = integer(v, "shape_bits.rectangle_compulsory");
  s.polygon_full_base_bits = integer(v, "shape_bits.polygon_full_base");
  s.polygon_full_point_bits = integer(v, "shape_bits.polygon_full_point");
  s.polygon_compulsory_base_bits = integer(v, "shape_bits.polygon_compulsory_base");
  s.polygon_compulsory_point_bits = integer(v, "shape_bits.polygon_compulsory_point");
  return c;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

json read_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + " " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + " " + path.string() + " is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  out << content;
  if (!out) throw InvalidInputError("failed writing " + path.string());
}

std::string csv_preamble(const std::string& hash, const json& config) {
  return "# dataset_hash=" + hash + "\n# config=" + config.dump() + "\n";
}

struct Flags {
  std::string input;
  std::string sidecar;
  std::string config;
  std::string clusters;
  double e = 0, r = 0, rate = 0, footprint_width = 0, footprint_depth = 0;
  std::int64_t min_pts = 0;
  std::uint64_t seed = 0;
  std::string policies, mode, out_dir, under, enclosure, generation;
  bool print_config = false;
  // synth
  std::string preset, scenario, output;
  double duration = 0, frame_rate = 0;

  std::vector<std::pair<CLI::Option*, std::function<void(json&)>>> overrides;
};

void add_config_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file (default: $VRUCP_CONFIG)");
  cmd->add_flag("--print-config", f.print_config, "Print the resolved configuration with its sources and exit");
  auto over = [&](CLI::Option* opt, std::function<void(json&)> set) { f.overrides.emplace_back(opt, std::move(set)); };
  over(cmd->add_option("--e", f.e, "DBSCAN radius in meters"), [&f](json& j) { j["e"] = f.e; });
  over(cmd->add_option("--r", f.r, "Minimum coexistence ratio"), [&f](json& j) { j["r"] = f.r; });
  over(cmd->add_option("--min-pts", f.min_pts, "DBSCAN min points"), [&f](json& j) { j["min_pts"] = f.min_pts; });
  over(cmd->add_option("--rate", f.rate, "CPM generation rate in Hz"), [&f](json& j) { j["rate"] = f.rate; });
  over(cmd->add_option("--policies", f.policies, "Comma-separated: no-cluster,circle,ellipse,rectangle,polygon,adaptive"),
       [&f](json& j) { j["policies"] = f.policies; });
  over(cmd->add_option("--mode", f.mode, "Shape size variant: full or compulsory"),
       [&f](json& j) { j["mode"] = f.mode; });
  over(cmd->add_option("--seed", f.seed, "Seed for every random choice"), [&f](json& j) { j["seed"] = f.seed; });
  over(cmd->add_option("--out-dir", f.out_dir, "Directory for output files"),
       [&f](json& j) { j["out_dir"] = f.out_dir; });
  over(cmd->add_option("--under-shape", f.under, "center or footprint"),
       [&f](json& j) { j["under_shape"] = f.under; });
  over(cmd->add_option("--enclosure", f.enclosure, "Fit shapes to footprint corners or centers"),
       [&f](json& j) { j["enclosure"] = f.enclosure; });
  over(cmd->add_option("--generation", f.generation, "fixed or event"),
       [&f](json& j) { j["generation"] = f.generation; });
  over(cmd->add_option("--footprint-width", f.footprint_width, "VRU footprint width in meters"),
       [&f](json& j) { j["footprint_width"] = f.footprint_width; });
  over(cmd->add_option("--footprint-depth", f.footprint_depth, "VRU footprint depth in meters"),
       [&f](json& j) { j["footprint_depth"] = f.footprint_depth; });
}

void add_input_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("-i,--input", f.input, "Trajectory CSV")->required();
  cmd->add_option("--sidecar", f.sidecar, "Column/unit mapping (default: <input>.sidecar if present)");
}

CliConfig resolve(const Flags& f) {
  CliConfig c = default_config();
  std::string path = f.config;
  if (path.empty()) {
    if (const char* env = std::getenv("VRUCP_CONFIG"); env && *env) path = env;
  }
  if (!path.empty()) {
    apply(c, read_json_file(path, "config file"), Source::kFile);
    c.config_file = path;
  }
  json flags = json::object();
  for (const auto& [opt, set] : f.overrides) {
    if (opt->count() > 0) set(flags);
  }
  apply(c, flags, Source::kFlag);
  return c;
}

io::TrajectoryTable load_input(const Flags& f) {
  const fs::path input = f.input;
  std::error_code ec;
  if (fs::exists(input, ec) && fs::is_regular_file(input, ec) && fs::file_size(input, ec) == 0) {
    throw DataError("no trajectories in " + input.string());
  }
  const auto table = f.sidecar.empty() ? io::load_trajectories(input)
                                       : io::load_trajectories(input, io::read_sidecar(f.sidecar));
  if (table.empty()) throw DataError("no trajectories in " + input.string());
  return table;
}

fs::path prepare_out_dir(const CliConfig& c) {
  const fs::path dir = c.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidInputError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

json cluster_config_json(const sim::SimConfig& c) {
  return {{"e", c.cluster.e}, {"r", c.cluster.r}, {"min_pts", c.cluster.min_pts}};
}

int cmd_cluster(const Flags& f, const CliConfig& c, std::ostream& out) {
  const auto table = load_input(f);
  const auto clusters = clustering::time_sequence_clusters(table, c.sim.cluster);
  const auto stats = clustering::cluster_size_pdf(clusters, table);
  const auto hash = io::content_hash(table);
  const auto config = cluster_config_json(c.sim);

  json j;
  j["provenance"] = {{"dataset_hash", hash}, {"config", config}};
  json list = json::array();
  for (const auto& cl : clusters) {
    json members = json::array();
    for (const auto m : cl.members) members.push_back(m.value);
    list.push_back({{"id", cl.id}, {"members", members}, {"coexistence", cl.coexistence},
                    {"active_window", cl.active_window}});
  }
  j["clusters"] = std::move(list);
  json pdf = json::object();
  for (const auto& [size, p] : stats.pdf) pdf[std::to_string(size)] = p;
  j["cluster_size_pdf"] = std::move(pdf);
  j["unclustered_fraction"] = stats.unclustered_fraction;
  j["unclustered_vru_fraction"] = stats.unclustered_vru_fraction;

  const auto dir = prepare_out_dir(c);
  write_text(dir / "clusters.json", j.dump(2) + "\n");
  std::ostringstream csv;
  csv << csv_preamble(hash, config) << "size,count,probability\n";
  for (const auto& [size, count] : stats.counts) csv << size << ',' << count << ',' << fmt(stats.pdf.at(size)) << '\n';
  write_text(dir / "cluster_size_pdf.csv", csv.str());

  out << clusters.size() << " clusters over " << table.timestamps().size() << " frames\n";
  out << "unclustered fraction: " << fmt(stats.unclustered_fraction) << " of VRU-frame instances, "
      << fmt(stats.unclustered_vru_fraction) << " of VRUs\n";
  for (const auto& [size, p] : stats.pdf) out << "  size " << size << ": " << fmt(p) << '\n';
  return 0;
}

std::vector<clustering::Cluster> read_clusters(const fs::path& path, const std::string& expected_hash) {
  const auto j = read_json_file(path, "clusters file");
  try {
    const auto hash = j.at("provenance").at("dataset_hash").get<std::string>();
    if (hash != expected_hash) {
      throw DataError("clusters file " + path.string() + " was made from a different dataset (hash " + hash +
                      ", input has " + expected_hash + ")");
    }
    std::vector<clustering::Cluster> out;
    for (const auto& item : j.at("clusters")) {
      clustering::Cluster c;
      c.id = item.at("id").get<std::int64_t>();
      for (const auto& m : item.at("members")) c.members.push_back(VruId{m.get<std::int64_t>()});
      c.coexistence = item.at("coexistence").get<double>();
      c.active_window = item.at("active_window").get<std::vector<double>>();
      if (c.members.size() < 2 || c.active_window.empty()) throw SchemaError("clusters file: malformed cluster");
      std::sort(c.members.begin(), c.members.end());
      std::sort(c.active_window.begin(), c.active_window.end());
      out.push_back(std::move(c));
    }
    return out;
  } catch (const json::exception& e) {
    throw SchemaError("clusters file " + path.string() + ": " + e.what());
  }
}

int cmd_shapes(const Flags& f, CliConfig c, std::ostream& out) {
  const auto table = load_input(f);
  const auto hash = io::content_hash(table);
  auto clusters = read_clusters(f.clusters, hash);
  // Only the evaluations are needed; skip the shape policies' byte accounting.
  c.sim.policies = {cpm::Policy::kNoCluster};
  const auto report = sim::run_simulation(table, std::move(clusters), c.sim);

  std::ostringstream csv;
  csv << csv_preamble(hash, sim::to_json(c.sim))
      << "tick,cluster_id,shape_kind,ca,cadi,area,size_bits,chosen_by_adaptive\n";
  for (const auto& e : report.evaluations) {
    csv << fmt(e.tick) << ',' << e.cluster_id << ',' << geometry::to_string(e.kind) << ',' << fmt(e.ca.value()) << ','
        << fmt(e.cadi) << ',' << fmt(e.area) << ',' << e.size_bits << ',' << (e.chosen_by_adaptive ? 1 : 0) << '\n';
  }
  const auto dir = prepare_out_dir(c);
  write_text(dir / "shapes.csv", csv.str());
  out << report.evaluations.size() << " shape evaluations over " << report.generation_times.size() << " ticks\n";
  return 0;
}

int cmd_simulate(const Flags& f, const CliConfig& c, std::ostream& out) {
  c.sim.validate();
  const auto table = load_input(f);
  const auto report = sim::run_simulation(table, c.sim);
  const auto summary = sim::summarize(report);
  const auto dir = prepare_out_dir(c);
  write_text(dir / "report.json", sim::to_json(report).dump(2) + "\n");
  json s = sim::to_json(summary);
  s["provenance"] = {{"dataset_hash", report.dataset_hash}, {"config", sim::to_json(c.sim)}};
  write_text(dir / "summary.json", s.dump(2) + "\n");
  for (const auto& pr : report.policies) {
    std::ostringstream csv;
    csv << csv_preamble(report.dataset_hash, sim::to_json(c.sim));
    sim::write_series_csv(pr, csv);
    write_text(dir / ("series_" + std::string(cpm::to_string(pr.policy)) + ".csv"), csv.str());
  }
  sim::print_summary(summary, out);
  return 0;
}

io::ScenarioSpec scenario_from_json(const json& j) {
  try {
    io::ScenarioSpec spec;
    auto point = [](const json& p) { return Point2D{p.at(0).get<double>(), p.at(1).get<double>()}; };
    spec.frame_rate = j.value("frame_rate", spec.frame_rate);
    spec.position_noise = j.value("position_noise", spec.position_noise);
    for (const auto& g : j.value("groups", json::array())) {
      io::GroupSpec gs;
      gs.size = g.value("size", gs.size);
      gs.spacing = g.value("spacing", gs.spacing);
      if (g.contains("start")) gs.start = point(g["start"]);
      if (g.contains("velocity")) gs.velocity = point(g["velocity"]);
      gs.start_time = g.value("start_time", gs.start_time);
      gs.duration = g.value("duration", gs.duration);
      spec.groups.push_back(gs);
    }
    for (const auto& w : j.value("walkers", json::array())) {
      io::WalkerSpec ws;
      if (w.contains("start")) ws.start = point(w["start"]);
      if (w.contains("velocity")) ws.velocity = point(w["velocity"]);
      ws.start_time = w.value("start_time", ws.start_time);
      ws.duration = w.value("duration", ws.duration);
      spec.walkers.push_back(ws);
    }
    return spec;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("scenario: ") + e.what());
  }
}

int cmd_synth(const Flags& f, const CliConfig& c, CLI::Option* duration_opt, CLI::Option* rate_opt, std::ostream& out) {
  if (f.preset.empty() == f.scenario.empty()) throw InvalidInputError("synth needs exactly one of --preset or --scenario");
  io::ScenarioSpec spec;
  if (!f.scenario.empty()) {
    spec = scenario_from_json(read_json_file(f.scenario, "scenario file"));
  } else if (f.preset == "lockstep") {
    spec.groups.push_back(io::GroupSpec{3, 0.5, {0, 0}, {1.2, 0}, 0.0, 60.0});
  } else if (f.preset == "walkers") {
    for (int i = 0; i < 10; ++i) {
      spec.walkers.push_back(io::WalkerSpec{{0, 10.0 * i}, {i % 2 ? -1.1 : 1.3, 0}, 0.0, 60.0});
    }
  } else if (f.preset == "crowd") {
    io::CrowdSpec crowd;
    if (duration_opt->count()) crowd.duration = f.duration;
    if (rate_opt->count()) crowd.frame_rate = f.frame_rate;
    spec = io::make_crowd(crowd, c.sim.seed);
  } else {
    throw InvalidInputError("unknown preset '" + f.preset + "' (expected lockstep, walkers or crowd)");
  }
  if (duration_opt->count()) {
    for (auto& g : spec.groups) g.duration = f.duration;
    for (auto& w : spec.walkers) w.duration = f.duration;
  }
  if (rate_opt->count()) spec.frame_rate = f.frame_rate;
  const auto table = io::synth_scenario(spec, c.sim.seed);
  if (f.output.empty()) {
    io::export_trajectories(table, out);
  } else {
    io::export_trajectories(table, fs::path(f.output));
  }
  return 0;
}

}  // namespace

std::string_view to_string(Source source) {
  switch (source) {
    case Source::kDefault: return "default";
    case Source::kFile: return "file";
    case Source::kFlag: return "flag";
  }
  return "?";
}

CliConfig default_config() {
  CliConfig c;
  flatten(sim::to_json(c.sim), "", c.values);
  c.values["out_dir"] = c.out_dir;
  for (const auto& [key, value] : c.values.items()) c.sources[key] = Source::kDefault;
  return c;
}

void apply(CliConfig& config, const json& patch, Source source) {
  if (!patch.is_object()) throw ConfigError("configuration must be a JSON object");
  json flat = json::object();
  flatten(patch, "", flat);
  for (const auto& [key, value] : flat.items()) {
    if (!config.values.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    config.values[key] = value;
    config.sources[key] = source;
  }
  config.sim = to_sim(config.values);
  config.out_dir = text(config.values, "out_dir");
}

json provenance_json(const CliConfig& config) {
  json j = json::object();
  for (const auto& [key, value] : config.values.items()) {
    j[key] = {{"value", value}, {"source", std::string(to_string(config.sources.at(key)))}};
  }
  return j;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cluster VRU trajectories, fit cluster shapes and account CPM bytes"};
  app.name("vrucp");
  app.require_subcommand(1);
  Flags f;

  auto* cluster = app.add_subcommand("cluster", "Cluster trajectories offline; write clusters and the size PDF");
  add_input_options(cluster, f);
  add_config_options(cluster, f);

  auto* shapes = app.add_subcommand("shapes", "Per-tick shape evaluations (CA, CADI, size) for stored clusters");
  add_input_options(shapes, f);
  shapes->add_option("--clusters", f.clusters, "clusters.json from the cluster command")->required();
  add_config_options(shapes, f);

  auto* simulate = app.add_subcommand("simulate", "Run the byte-accounting experiment for every policy");
  add_input_options(simulate, f);
  add_config_options(simulate, f);

  auto* synth = app.add_subcommand("synth", "Write a synthetic trajectory CSV");
  synth->add_option("--preset", f.preset, "lockstep, walkers or crowd");
  synth->add_option("--scenario", f.scenario, "JSON scenario (groups, walkers, frame_rate, position_noise)");
  synth->add_option("-o,--output", f.output, "Output CSV (default: stdout)");
  auto* duration_opt = synth->add_option("--duration", f.duration, "Override every track's duration, seconds");
  auto* rate_opt = synth->add_option("--frame-rate", f.frame_rate, "Override the frame rate, Hz");
  add_config_options(synth, f);

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 2;
    }
    const CliConfig config = resolve(f);
    if (f.print_config) {
      json j;
      j["config_file"] = config.config_file ? json(*config.config_file) : json(nullptr);
      j["settings"] = provenance_json(config);
      out << j.dump(2) << '\n';
      return 0;
    }
    if (*cluster) {
      try {
        config.sim.cluster.validate();
      } catch (const InvalidInputError& e) {
        throw ConfigError(e.what());
      }
      return cmd_cluster(f, config, out);
    }
    if (*shapes) return cmd_shapes(f, config, out);
    if (*simulate) return cmd_simulate(f, config, out);
    if (*synth) return cmd_synth(f, config, duration_opt, rate_opt, out);
    return 2;
  } catch (const UserError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace vrucp::cli
