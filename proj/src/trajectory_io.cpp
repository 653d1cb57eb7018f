#include "vrucp/trajectory_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "vrucp/errors.hpp"

namespace vrucp::io {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string join_ids(const std::vector<VruId>& ids) {
  std::ostringstream os;
  for (std::size_t i = 0; i < ids.size(); ++i) os << (i ? ", " : "") << ids[i];
  return os.str();
}

}  // namespace

TrajectoryTable TrajectoryTable::from_states(std::vector<VruState> states, double frame_rate) {
  if (!(std::isfinite(frame_rate) && frame_rate > 0.0)) {
    throw InvalidInputError("trajectory table: frame rate must be positive");
  }
  std::map<VruId, double> last_time;
  std::set<VruId> offenders;
  for (const auto& s : states) {
    if (!std::isfinite(s.timestamp) || !is_finite(s.position) || !std::isfinite(s.speed) ||
        !std::isfinite(s.heading)) {
      std::ostringstream os;
      os << "trajectory table: non-finite value for VRU " << s.id << " at t=" << s.timestamp;
      throw InvalidInputError(os.str());
    }
    auto [it, inserted] = last_time.try_emplace(s.id, s.timestamp);
    if (!inserted) {
      if (!(s.timestamp > it->second)) offenders.insert(s.id);
      it->second = s.timestamp;
    }
  }
  if (!offenders.empty()) {
    throw DataError("timestamps not strictly increasing for VRU ids: " +
                    join_ids({offenders.begin(), offenders.end()}));
  }

  std::sort(states.begin(), states.end(), [](const VruState& a, const VruState& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.id < b.id;
  });

  TrajectoryTable t;
  t.frame_rate_ = frame_rate;
  t.states_ = std::move(states);
  for (std::size_t i = 0; i < t.states_.size(); ++i) {
    if (i == 0 || t.states_[i].timestamp != t.states_[i - 1].timestamp) {
      t.timestamps_.push_back(t.states_[i].timestamp);
      t.frame_begin_.push_back(i);
    }
    t.tracks_[t.states_[i].id].push_back(i);
  }
  t.frame_begin_.push_back(t.states_.size());
  return t;
}

std::span<const VruState> TrajectoryTable::frame(double t) const {
  const auto it = std::lower_bound(timestamps_.begin(), timestamps_.end(), t);
  if (it == timestamps_.end() || *it != t) return {};
  const auto k = static_cast<std::size_t>(it - timestamps_.begin());
  return std::span<const VruState>(states_).subspan(frame_begin_[k],
                                                    frame_begin_[k + 1] - frame_begin_[k]);
}

std::vector<VruId> TrajectoryTable::vru_ids() const {
  std::vector<VruId> ids;
  ids.reserve(tracks_.size());
  for (const auto& [id, _] : tracks_) ids.push_back(id);
  return ids;
}

std::vector<VruState> TrajectoryTable::track(VruId id) const {
  std::vector<VruState> out;
  if (auto it = tracks_.find(id); it != tracks_.end()) {
    for (auto i : it->second) out.push_back(states_[i]);
  }
  return out;
}

std::vector<double> TrajectoryTable::presence(VruId id) const {
  std::vector<double> out;
  if (auto it = tracks_.find(id); it != tracks_.end()) {
    for (auto i : it->second) out.push_back(states_[i].timestamp);
  }
  return out;
}

LoaderOptions parse_sidecar(std::istream& in) {
  LoaderOptions o;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line.substr(0, line.find('#')));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw SchemaError("sidecar line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    auto number = [&] {
      const auto v = parse_number<double>(value);
      if (!v || !std::isfinite(*v) || *v <= 0.0) {
        throw SchemaError("sidecar line " + std::to_string(lineno) + ": '" + key +
                          "' needs a positive number");
      }
      return *v;
    };
    if (key == "column.vru_id") o.id_column = value;
    else if (key == "column.time") o.time_column = value;
    else if (key == "column.x") o.x_column = value;
    else if (key == "column.y") o.y_column = value;
    else if (key == "column.speed") o.speed_column = value;
    else if (key == "column.heading") o.heading_column = value;
    else if (key == "frame_rate") o.frame_rate = number();
    else if (key == "position_scale") o.position_scale = number();
    else if (key == "speed_scale") o.speed_scale = number();
    else if (key == "time.kind") {
      if (value == "seconds") o.time_kind = TimeColumn::kSeconds;
      else if (value == "frame") o.time_kind = TimeColumn::kFrame;
      else throw SchemaError("sidecar line " + std::to_string(lineno) + ": time.kind must be seconds or frame");
    } else if (key == "heading_unit") {
      if (value == "rad") o.heading_unit = AngleUnit::kRadians;
      else if (value == "deg") o.heading_unit = AngleUnit::kDegrees;
      else throw SchemaError("sidecar line " + std::to_string(lineno) + ": heading_unit must be rad or deg");
    } else {
      throw SchemaError("sidecar line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return o;
}

LoaderOptions read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open sidecar " + path.string());
  return parse_sidecar(in);
}

std::filesystem::path default_sidecar_path(const std::filesystem::path& input) {
  return std::filesystem::path(input.string() + ".sidecar");
}

TrajectoryTable load_trajectories(std::istream& in, const LoaderOptions& options) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  std::optional<double> comment_rate;
  while (header.empty() && std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const std::string body = trim(text.substr(1));
      if (body.rfind("frame_rate=", 0) == 0) comment_rate = parse_number<double>(body.substr(11));
      continue;
    }
    header = split_csv(text);
  }
  if (header.empty()) throw SchemaError("trajectory file has no header row");

  auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) throw SchemaError("missing required column '" + name + "'");
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_id = *column(options.id_column, true);
  const std::size_t c_time = *column(options.time_column, true);
  const std::size_t c_x = *column(options.x_column, true);
  const std::size_t c_y = *column(options.y_column, true);
  const std::size_t c_speed = *column(options.speed_column, true);
  const auto c_heading = column(options.heading_column, false);
  const auto c_derived = column("heading_derived", false);

  const std::optional<double> rate = options.frame_rate ? options.frame_rate : comment_rate;
  if (options.time_kind == TimeColumn::kFrame && !rate) {
    throw SchemaError("frame-indexed time column needs frame_rate in the sidecar");
  }

  std::vector<VruState> states;
  std::vector<bool> needs_heading;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split_csv(text);
    const std::string where = "line " + std::to_string(lineno);
    if (fields.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    auto real = [&](std::size_t col) {
      const auto v = parse_number<double>(fields[col]);
      if (!v) throw DataError(where + ": cannot parse column '" + header[col] + "' ('" + fields[col] + "')");
      if (!std::isfinite(*v)) throw DataError(where + ": non-finite value in column '" + header[col] + "'");
      return *v;
    };
    VruState s;
    const auto id = parse_number<std::int64_t>(fields[c_id]);
    if (!id) throw DataError(where + ": VRU id must be an integer ('" + fields[c_id] + "')");
    s.id = VruId{*id};
    s.timestamp = real(c_time);
    if (options.time_kind == TimeColumn::kFrame) s.timestamp /= *rate;
    s.position = {real(c_x) * options.position_scale, real(c_y) * options.position_scale};
    s.speed = real(c_speed) * options.speed_scale;
    bool missing = !c_heading || fields[*c_heading].empty();
    if (!missing) {
      s.heading = real(*c_heading);
      if (options.heading_unit == AngleUnit::kDegrees) s.heading *= std::numbers::pi / 180.0;
    }
    if (c_derived && !fields[*c_derived].empty()) s.heading_derived = real(*c_derived) != 0.0;
    states.push_back(s);
    needs_heading.push_back(missing);
  }

  // Reconstruct missing headings from neighboring positions of the same VRU.
  if (std::find(needs_heading.begin(), needs_heading.end(), true) != needs_heading.end()) {
    std::map<VruId, std::vector<std::size_t>> by_id;
    for (std::size_t i = 0; i < states.size(); ++i) by_id[states[i].id].push_back(i);
    for (auto& [id, idx] : by_id) {
      std::sort(idx.begin(), idx.end(),
                [&](std::size_t a, std::size_t b) { return states[a].timestamp < states[b].timestamp; });
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (!needs_heading[idx[k]]) continue;
        Point2D step{};
        if (k + 1 < idx.size()) step = states[idx[k + 1]].position - states[idx[k]].position;
        if (norm(step) == 0.0 && k > 0) step = states[idx[k]].position - states[idx[k - 1]].position;
        states[idx[k]].heading = norm(step) > 0.0 ? std::atan2(step.y, step.x) : 0.0;
        states[idx[k]].heading_derived = true;
      }
    }
  }

  double frame_rate = rate.value_or(0.0);
  if (!rate) {
    std::set<double> ts;
    for (const auto& s : states) ts.insert(s.timestamp);
    std::vector<double> gaps;
    for (auto it = ts.begin(); it != ts.end() && std::next(it) != ts.end(); ++it) {
      gaps.push_back(*std::next(it) - *it);
    }
    if (gaps.empty()) {
      frame_rate = 1.0;
    } else {
      std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
      frame_rate = 1.0 / gaps[gaps.size() / 2];
    }
  }
  return TrajectoryTable::from_states(std::move(states), frame_rate);
}

TrajectoryTable load_trajectories(const std::filesystem::path& path, const LoaderOptions& options) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open trajectory file " + path.string());
  return load_trajectories(in, options);
}

TrajectoryTable load_trajectories(const std::filesystem::path& path) {
  const auto sidecar = default_sidecar_path(path);
  const LoaderOptions options = std::filesystem::exists(sidecar) ? read_sidecar(sidecar) : LoaderOptions{};
  return load_trajectories(path, options);
}

void export_trajectories(const TrajectoryTable& table, std::ostream& out) {
  out << "# frame_rate=" << format_double(table.frame_rate()) << '\n';
  out << "vru_id,time,x,y,speed,heading,heading_derived\n";
  for (const auto& s : table.states()) {
    out << s.id.value << ',' << format_double(s.timestamp) << ',' << format_double(s.position.x)
        << ',' << format_double(s.position.y) << ',' << format_double(s.speed) << ','
        << format_double(s.heading) << ',' << (s.heading_derived ? 1 : 0) << '\n';
  }
}

void export_trajectories(const TrajectoryTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  export_trajectories(table, out);
}

std::string content_hash(const TrajectoryTable& table) {
  std::ostringstream os;
  export_trajectories(table, os);
  const std::string text = os.str();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::vector<Tick> resample_ticks(const TrajectoryTable& table, double rate) {
  if (!(std::isfinite(rate) && rate > 0.0)) throw InvalidInputError("resample: rate must be positive");
  std::vector<Tick> ticks;
  if (table.empty()) return ticks;
  if (rate > table.frame_rate() * (1.0 + 1e-9)) {
    throw InvalidInputError("resample: rate exceeds the native frame rate");
  }

  const double half = 0.5 / table.frame_rate();
  const double t0 = table.timestamps().front();
  const double t1 = table.timestamps().back();
  const auto count = static_cast<std::size_t>(std::floor((t1 - t0) * rate + 1e-9)) + 1;

  std::vector<std::pair<VruId, std::vector<double>>> tracks;
  for (const auto id : table.vru_ids()) tracks.emplace_back(id, table.presence(id));
  std::map<VruId, double> last_used;

  ticks.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Tick tick;
    tick.time = t0 + static_cast<double>(k) / rate;
    for (const auto& [id, times] : tracks) {
      if (times.front() > tick.time + half + 1e-12 || times.back() < tick.time - half - 1e-12) continue;
      auto it = std::lower_bound(times.begin(), times.end(), tick.time);
      double best = std::numeric_limits<double>::quiet_NaN();
      if (it != times.begin()) best = *std::prev(it);
      if (it != times.end() && (std::isnan(best) || *it - tick.time < tick.time - best)) best = *it;
      if (std::isnan(best) || std::abs(best - tick.time) > half + 1e-12) continue;
      if (auto used = last_used.find(id); used != last_used.end() && used->second == best) continue;
      last_used[id] = best;
      for (const auto& s : table.frame(best)) {
        if (s.id == id) {
          tick.states.push_back(s);
          break;
        }
      }
    }
    ticks.push_back(std::move(tick));
  }
  return ticks;
}

TrajectoryTable resample(const TrajectoryTable& table, double rate) {
  std::vector<VruState> states;
  for (auto& tick : resample_ticks(table, rate)) {
    states.insert(states.end(), tick.states.begin(), tick.states.end());
  }
  return TrajectoryTable::from_states(std::move(states), rate);
}

TrajectoryTable synth_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  if (!(std::isfinite(spec.frame_rate) && spec.frame_rate > 0.0)) {
    throw InvalidInputError("synth: frame rate must be positive");
  }
  if (!(spec.position_noise >= 0.0)) throw InvalidInputError("synth: negative position noise");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spec.position_noise);
  std::vector<VruState> states;
  std::int64_t next_id = 1;

  // Frames sit on one global grid k / frame_rate so every VRU shares timestamps.
  auto emit = [&](VruId id, Point2D start, Point2D velocity, double start_time, double duration,
                  Point2D offset) {
    const double speed = norm(velocity);
    const double heading = speed > 0.0 ? std::atan2(velocity.y, velocity.x) : 0.0;
    const auto first = static_cast<std::int64_t>(std::ceil(start_time * spec.frame_rate - 1e-9));
    const auto last = static_cast<std::int64_t>(std::floor((start_time + duration) * spec.frame_rate + 1e-9));
    for (std::int64_t f = first; f <= last; ++f) {
      VruState s;
      s.id = id;
      s.timestamp = static_cast<double>(f) / spec.frame_rate;
      s.position = start + (s.timestamp - start_time) * velocity + offset;
      if (spec.position_noise > 0.0) s.position = s.position + Point2D{noise(rng), noise(rng)};
      s.speed = speed;
      s.heading = heading;
      states.push_back(s);
    }
  };
  auto check_timing = [](double start_time, double duration) {
    if (!std::isfinite(start_time) || !(duration >= 0.0) || !std::isfinite(duration)) {
      throw InvalidInputError("synth: invalid start time or duration");
    }
  };

  for (const auto& g : spec.groups) {
    if (!(g.spacing >= 0.0) || !std::isfinite(g.spacing)) throw InvalidInputError("synth: negative group spacing");
    if (g.size == 0) throw InvalidInputError("synth: empty group");
    if (!is_finite(g.start) || !is_finite(g.velocity)) throw InvalidInputError("synth: non-finite group motion");
    check_timing(g.start_time, g.duration);
    const double speed = norm(g.velocity);
    const Point2D along = speed > 0.0 ? (1.0 / speed) * g.velocity : Point2D{1.0, 0.0};
    const Point2D across{-along.y, along.x};
    for (std::size_t i = 0; i < g.size; ++i) {
      const double slot = static_cast<double>(i) - 0.5 * static_cast<double>(g.size - 1);
      emit(VruId{next_id++}, g.start, g.velocity, g.start_time, g.duration, (slot * g.spacing) * across);
    }
  }
  for (const auto& w : spec.walkers) {
    if (!is_finite(w.start) || !is_finite(w.velocity)) throw InvalidInputError("synth: non-finite walker motion");
    check_timing(w.start_time, w.duration);
    emit(VruId{next_id++}, w.start, w.velocity, w.start_time, w.duration, {});
  }
  return TrajectoryTable::from_states(std::move(states), spec.frame_rate);
}

ScenarioSpec make_crowd(const CrowdSpec& crowd, std::uint64_t seed) {
  if (crowd.min_group_size < 2 || crowd.max_group_size < crowd.min_group_size) {
    throw InvalidInputError("crowd: group sizes must satisfy 2 <= min <= max");
  }
  if (!(crowd.lane_gap > 0.0)) throw InvalidInputError("crowd: lane gap must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(crowd.min_group_size, crowd.max_group_size);
  std::uniform_real_distribution<double> speed(0.8, 1.6);
  std::uniform_real_distribution<double> start_x(-20.0, 20.0);
  std::bernoulli_distribution reverse(0.5);

  // Lane order is shuffled so groups and singles interleave.
  std::vector<bool> is_group(crowd.groups, true);
  is_group.resize(crowd.groups + crowd.singles, false);
  std::shuffle(is_group.begin(), is_group.end(), rng);

  ScenarioSpec spec;
  spec.frame_rate = crowd.frame_rate;
  for (std::size_t lane = 0; lane < is_group.size(); ++lane) {
    const double vx = speed(rng) * (reverse(rng) ? -1.0 : 1.0);
    const Point2D start{start_x(rng), static_cast<double>(lane) * crowd.lane_gap};
    if (is_group[lane]) {
      GroupSpec g;
      g.size = size(rng);
      g.start = start;
      g.velocity = {vx, 0.0};
      g.duration = crowd.duration;
      spec.groups.push_back(g);
    } else {
      spec.walkers.push_back(WalkerSpec{start, {vx, 0.0}, 0.0, crowd.duration});
    }
  }
  return spec;
}

}  // namespace vrucp::io
