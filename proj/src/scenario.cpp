#include "edcasim/scenario.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace edcasim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads one JSON object, tracking which keys were consumed so that unknown
// keys can be reported with their full path.
class ObjectReader {
public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& key, const std::string& what) {
    throw ConfigError("scenario key '" + key + "': " + what);
  }

  std::string key(std::string_view k) const {
    return path_.empty() ? std::string(k) : path_ + "." + std::string(k);
  }

  bool has(const char* k) const { return j_.contains(k); }

  const json& raw(const char* k) {
    seen_.insert(k);
    return j_.at(k);
  }

  std::uint64_t u64(const char* k, std::optional<std::uint64_t> def = std::nullopt) {
    if (!has(k)) return require_default(k, def);
    const json& v = raw(k);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && std::floor(d) == d && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    fail(key(k), "expected a non-negative integer");
  }

  double real(const char* k, std::optional<double> def = std::nullopt) {
    if (!has(k)) return require_default(k, def);
    const json& v = raw(k);
    if (!v.is_number()) fail(key(k), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key(k), "expected a finite number");
    return d;
  }

  bool boolean(const char* k, std::optional<bool> def = std::nullopt) {
    if (!has(k)) return require_default(k, def);
    const json& v = raw(k);
    if (!v.is_boolean()) fail(key(k), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const char* k, std::optional<std::string> def = std::nullopt) {
    if (!has(k)) return require_default(k, def);
    const json& v = raw(k);
    if (!v.is_string()) fail(key(k), "expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!seen_.contains(k)) fail(key(k), "unknown key");
    }
  }

private:
  template <typename T>
  T require_default(const char* k, const std::optional<T>& def) const {
    if (!def) fail(key(k), "missing required key");
    return *def;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Position read_position(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    ObjectReader::fail(key, "expected [x, y]");
  }
  Position p{j[0].get<double>(), j[1].get<double>()};
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) ObjectReader::fail(key, "non-finite coordinate");
  return p;
}

template <typename Fn>
void wrap_invalid(const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    ObjectReader::fail(key, e.what());
  }
}

RadioParams read_radio(const json& j) {
  ObjectReader r(j, "radio");
  RadioParams d;
  RadioParams p;
  p.data_rate_bps = r.u64("data_rate_bps", d.data_rate_bps);
  p.slot_us = r.u64("slot_us", d.slot_us);
  p.sifs_us = r.u64("sifs_us", d.sifs_us);
  p.difs_us = r.u64("difs_us", p.sifs_us + 2 * p.slot_us);
  p.preamble_us = r.u64("preamble_us", d.preamble_us);
  p.mac_overhead_bytes = static_cast<std::uint32_t>(r.u64("mac_overhead_bytes", d.mac_overhead_bytes));
  p.ack_bytes = static_cast<std::uint32_t>(r.u64("ack_bytes", d.ack_bytes));
  p.range_m = r.real("range_m", d.range_m);
  p.propagation_delay_us = r.u64("propagation_delay_us", d.propagation_delay_us);
  r.finish();
  wrap_invalid("radio", [&] { p.validate(); });
  return p;
}

WiredLinkParams read_wired(const json& j) {
  ObjectReader r(j, "wired");
  WiredLinkParams d;
  WiredLinkParams p;
  p.rate_bps = r.u64("rate_bps", d.rate_bps);
  p.delay_us = r.u64("delay_us", d.delay_us);
  p.queue_capacity = r.u64("queue_capacity", d.queue_capacity);
  r.finish();
  wrap_invalid("wired", [&] { p.validate(); });
  return p;
}

AcParams read_ac(const json& j, const std::string& key, AcParams base) {
  ObjectReader r(j, key);
  base.aifsn = static_cast<std::uint32_t>(r.u64("aifsn", base.aifsn));
  base.cw_min = static_cast<std::uint32_t>(r.u64("cw_min", base.cw_min));
  base.cw_max = static_cast<std::uint32_t>(r.u64("cw_max", base.cw_max));
  base.txop_limit_us = r.u64("txop_limit_us", base.txop_limit_us);
  base.retry_limit = static_cast<std::uint32_t>(r.u64("retry_limit", base.retry_limit));
  base.queue_capacity = r.u64("queue_capacity", base.queue_capacity);
  r.finish();
  wrap_invalid(key, [&] { base.validate(); });
  return base;
}

WaypointPath read_path(const json& j, const std::string& key) {
  ObjectReader r(j, key);
  WaypointPath path;
  const json& wps = r.raw("waypoints");
  if (!wps.is_array()) ObjectReader::fail(key + ".waypoints", "expected an array of [x, y]");
  for (std::size_t i = 0; i < wps.size(); ++i) {
    path.waypoints.push_back(read_position(wps[i], key + ".waypoints[" + std::to_string(i) + "]"));
  }
  path.speed_mps = r.real("speed_mps");
  path.repeat = r.boolean("repeat", false);
  r.finish();
  wrap_invalid(key, [&] { path.validate(); });
  return path;
}

StationRole read_role(const std::string& s, const std::string& key) {
  if (s == "QSTA") return StationRole::Qsta;
  if (s == "BS") return StationRole::BaseStation;
  if (s == "wired-sink") return StationRole::WiredSink;
  ObjectReader::fail(key, "expected one of QSTA, BS, wired-sink");
}

MacMode read_mode(const std::string& s) {
  if (s == "DCF") return MacMode::Dcf;
  if (s == "EDCF") return MacMode::Edcf;
  ObjectReader::fail("mac_mode", "expected DCF or EDCF");
}

ordered_json position_json(Position p) { return ordered_json::array({p.x, p.y}); }

ordered_json ac_json(const AcParams& p) {
  ordered_json j;
  j["aifsn"] = p.aifsn;
  j["cw_min"] = p.cw_min;
  j["cw_max"] = p.cw_max;
  j["txop_limit_us"] = p.txop_limit_us;
  j["retry_limit"] = p.retry_limit;
  j["queue_capacity"] = p.queue_capacity;
  return j;
}

}  // namespace

std::string_view to_string(StationRole role) {
  switch (role) {
    case StationRole::Qsta: return "QSTA";
    case StationRole::BaseStation: return "BS";
    case StationRole::WiredSink: return "wired-sink";
  }
  return "?";
}

const StationSpec* Scenario::station(NodeId id) const {
  for (const auto& s : stations) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::uint64_t Scenario::effective_interval_us(const FlowSpec& flow) const {
  const double scaled = static_cast<double>(flow.interval_us) / load_multiplier;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(scaled)));
}

void Scenario::validate() const {
  auto fail = [](const std::string& key, const std::string& what) { ObjectReader::fail(key, what); };
  if (!(duration_s > 0.0)) fail("duration_s", "must be positive");
  if (!(warmup_s >= 0.0)) fail("warmup_s", "must be >= 0");
  if (!(duration_s > warmup_s)) fail("duration_s", "must exceed warmup_s");
  if (!(load_multiplier > 0.0) || !std::isfinite(load_multiplier)) {
    fail("load_multiplier", "must be positive");
  }
  if (!(bin_width_s > 0.0)) fail("bin_width_s", "must be positive");
  if (SimTime::seconds(bin_width_s).us() == 0) fail("bin_width_s", "must be at least 1 us");
  if (mobility_tick_us == 0) fail("mobility_tick_us", "must be positive");
  if (handshake_timeout_us == 0) fail("handshake_timeout_us", "must be positive");
  wrap_invalid("radio", [&] { radio.validate(); });
  wrap_invalid("wired", [&] { wired.validate(); });
  for (auto ac : kAccessCategoriesByPriority) {
    wrap_invalid("ac_overrides." + std::string(to_string(ac)), [&] { this->ac(ac).validate(); });
  }
  wrap_invalid("ac_overrides.DCF", [&] { dcf.validate(); });

  std::set<NodeId> ids;
  std::size_t bs_count = 0;
  std::size_t sink_count = 0;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const auto& s = stations[i];
    const std::string key = "stations[" + std::to_string(i) + "]";
    if (!ids.insert(s.id).second) fail(key + ".id", "duplicate station id " + std::to_string(s.id));
    if (s.path && s.role != StationRole::Qsta) fail(key + ".path", "only QSTAs may move");
    if (s.path) wrap_invalid(key + ".path", [&] { s.path->validate(); });
    if (s.range_m && !(*s.range_m > 0.0)) fail(key + ".range_m", "must be positive");
    if (s.role == StationRole::BaseStation) ++bs_count;
    if (s.role == StationRole::WiredSink) ++sink_count;
  }
  if (bs_count == 0) fail("stations", "at least one BS is required");
  if (sink_count != 1) fail("stations", "exactly one wired-sink is required");

  std::set<std::int32_t> flow_ids;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto& f = flows[i];
    const std::string key = "flows[" + std::to_string(i) + "]";
    if (f.flow_id < 0) fail(key + ".flow_id", "must be >= 0");
    if (!flow_ids.insert(f.flow_id).second) fail(key + ".flow_id", "duplicate flow id");
    wrap_invalid(key, [&] { f.validate(); });
    const StationSpec* src = station(f.src);
    const StationSpec* dst = station(f.dst);
    if (src == nullptr || src->role != StationRole::Qsta) fail(key + ".src", "must name a QSTA");
    if (dst == nullptr || dst->role != StationRole::WiredSink) {
      fail(key + ".dst", "must name the wired-sink");
    }
  }
}

std::vector<std::string> preset_names() { return {"A", "B", "C"}; }

namespace {

Scenario base_preset() {
  Scenario s;
  s.duration_s = 100.0;
  s.warmup_s = 5.0;
  s.mac_mode = MacMode::Edcf;
  s.stations.push_back({100, StationRole::BaseStation, {0.0, 0.0}, std::nullopt, std::nullopt});
  s.stations.push_back({200, StationRole::WiredSink, {0.0, 0.0}, std::nullopt, std::nullopt});
  // Four QSTAs on a 30 m circle around the BS.
  const std::array<Position, 4> ring = {Position{30, 0}, Position{0, 30}, Position{-30, 0},
                                        Position{0, -30}};
  for (NodeId i = 1; i <= 4; ++i) {
    s.stations.push_back({i, StationRole::Qsta, ring[i - 1], std::nullopt, std::nullopt});
  }
  auto flow = [](std::int32_t id, int prio, double mean, double std, std::uint64_t interval) {
    FlowSpec f;
    f.flow_id = id;
    f.priority = prio;
    f.src = static_cast<NodeId>(id);
    f.dst = 200;
    f.size_mean_bytes = mean;
    f.size_std_bytes = std;
    f.interval_us = interval;
    f.start_at = SimTime::millis(static_cast<std::uint64_t>(id));
    return f;
  };
  s.flows = {flow(1, 7, 300, 40, 25'000), flow(2, 5, 300, 40, 40'000),
             flow(3, 3, 800, 150, 50'000), flow(4, 1, 800, 150, 50'000)};
  return s;
}

}  // namespace

Scenario preset(std::string_view name) {
  Scenario s = base_preset();
  s.name = std::string(name);
  constexpr std::array<double, 4> lanes = {-15.0, -5.0, 5.0, 15.0};
  if (name == "A") return s;
  if (name == "B") {
    for (auto& st : s.stations) {
      if (st.role != StationRole::Qsta) continue;
      const double y = lanes[st.id - 1];
      st.position = {0.0, y};
      st.path = WaypointPath{{{0.0, y}, {250.0, y}}, 20.0, true};
    }
    return s;
  }
  if (name == "C") {
    s.stations.push_back({101, StationRole::BaseStation, {400.0, 0.0}, std::nullopt, std::nullopt});
    for (auto& st : s.stations) {
      if (st.role != StationRole::Qsta) continue;
      const double y = lanes[st.id - 1];
      st.position = {-50.0, y};
      st.path = WaypointPath{{{-50.0, y}, {450.0, y}}, 20.0, true};
    }
    return s;
  }
  std::string list;
  for (const auto& p : preset_names()) list += (list.empty() ? "" : ", ") + p;
  throw ConfigError("unknown preset '" + std::string(name) + "' (available presets: " + list + ")");
}

Scenario parse_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  ObjectReader r(doc, "");
  const auto schema = r.u64("schema");
  if (schema != kScenarioSchemaVersion) {
    ObjectReader::fail("schema", "unsupported version " + std::to_string(schema));
  }
  Scenario s;
  s.name = r.string("name", std::string("custom"));
  s.duration_s = r.real("duration_s");
  s.warmup_s = r.real("warmup_s", 5.0);
  s.mac_mode = read_mode(r.string("mac_mode", std::string("EDCF")));
  s.load_multiplier = r.real("load_multiplier", 1.0);
  s.mobility_tick_us = r.u64("mobility_tick_us", s.mobility_tick_us);
  s.handshake_timeout_us = r.u64("handshake_timeout_us", s.handshake_timeout_us);
  s.bin_width_s = r.real("bin_width_s", 1.0);
  if (r.has("radio")) s.radio = read_radio(r.raw("radio"));
  if (r.has("wired")) s.wired = read_wired(r.raw("wired"));
  if (r.has("ac_overrides")) {
    ObjectReader acr(r.raw("ac_overrides"), "ac_overrides");
    for (auto ac : kAccessCategoriesByPriority) {
      const std::string name(to_string(ac));
      if (acr.has(name.c_str())) {
        s.ac(ac) = read_ac(acr.raw(name.c_str()), "ac_overrides." + name, s.ac(ac));
      }
    }
    if (acr.has("DCF")) s.dcf = read_ac(acr.raw("DCF"), "ac_overrides.DCF", s.dcf);
    acr.finish();
  }

  const json& stations = r.raw("stations");
  if (!stations.is_array()) ObjectReader::fail("stations", "expected an array");
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const std::string key = "stations[" + std::to_string(i) + "]";
    ObjectReader sr(stations[i], key);
    StationSpec st;
    const auto id = sr.u64("id");
    if (id > 0xffffffffULL) ObjectReader::fail(key + ".id", "too large");
    st.id = static_cast<NodeId>(id);
    st.role = read_role(sr.string("role"), key + ".role");
    if (sr.has("position")) st.position = read_position(sr.raw("position"), key + ".position");
    if (sr.has("path")) {
      st.path = read_path(sr.raw("path"), key + ".path");
      if (!sr.has("position")) st.position = st.path->waypoints.front();
    }
    if (sr.has("range_m")) st.range_m = sr.real("range_m");
    sr.finish();
    s.stations.push_back(std::move(st));
  }

  const json& flows = r.has("flows") ? r.raw("flows") : json::array();
  if (!flows.is_array()) ObjectReader::fail("flows", "expected an array");
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const std::string key = "flows[" + std::to_string(i) + "]";
    ObjectReader fr(flows[i], key);
    FlowSpec f;
    const auto id = fr.u64("flow_id");
    if (id > 0x7fffffffULL) ObjectReader::fail(key + ".flow_id", "too large");
    f.flow_id = static_cast<std::int32_t>(id);
    f.priority = static_cast<int>(fr.u64("priority"));
    f.src = static_cast<NodeId>(fr.u64("src"));
    f.dst = static_cast<NodeId>(fr.u64("dst"));
    f.size_mean_bytes = fr.real("size_mean_bytes");
    f.size_std_bytes = fr.real("size_std_bytes", 0.0);
    f.interval_us = fr.u64("interval_us");
    f.start_at = SimTime(fr.u64("start_us", id * 1000));
    if (fr.has("stop_us")) f.stop_at = SimTime(fr.u64("stop_us"));
    fr.finish();
    s.flows.push_back(f);
  }
  r.finish();
  s.validate();
  return s;
}

Scenario load_scenario(std::string_view path_or_preset) {
  for (const auto& name : preset_names()) {
    if (name == path_or_preset) return preset(name);
  }
  const std::filesystem::path path{std::string(path_or_preset)};
  if (!std::filesystem::is_regular_file(path)) {
    std::string list;
    for (const auto& p : preset_names()) list += (list.empty() ? "" : ", ") + p;
    throw ConfigError("'" + std::string(path_or_preset) +
                      "' is neither a scenario file nor a preset (available presets: " + list + ")");
  }
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string emit_scenario(const Scenario& s) {
  ordered_json j;
  j["schema"] = kScenarioSchemaVersion;
  j["name"] = s.name;
  j["duration_s"] = s.duration_s;
  j["warmup_s"] = s.warmup_s;
  j["mac_mode"] = std::string(to_string(s.mac_mode));
  j["load_multiplier"] = s.load_multiplier;
  j["mobility_tick_us"] = s.mobility_tick_us;
  j["handshake_timeout_us"] = s.handshake_timeout_us;
  j["bin_width_s"] = s.bin_width_s;

  ordered_json radio;
  radio["data_rate_bps"] = s.radio.data_rate_bps;
  radio["slot_us"] = s.radio.slot_us;
  radio["sifs_us"] = s.radio.sifs_us;
  radio["difs_us"] = s.radio.difs_us;
  radio["preamble_us"] = s.radio.preamble_us;
  radio["mac_overhead_bytes"] = s.radio.mac_overhead_bytes;
  radio["ack_bytes"] = s.radio.ack_bytes;
  radio["range_m"] = s.radio.range_m;
  radio["propagation_delay_us"] = s.radio.propagation_delay_us;
  j["radio"] = radio;

  ordered_json wired;
  wired["rate_bps"] = s.wired.rate_bps;
  wired["delay_us"] = s.wired.delay_us;
  wired["queue_capacity"] = s.wired.queue_capacity;
  j["wired"] = wired;

  ordered_json acs;
  for (auto ac : kAccessCategoriesByPriority) acs[std::string(to_string(ac))] = ac_json(s.ac(ac));
  acs["DCF"] = ac_json(s.dcf);
  j["ac_overrides"] = acs;

  ordered_json stations = ordered_json::array();
  for (const auto& st : s.stations) {
    ordered_json o;
    o["id"] = st.id;
    o["role"] = std::string(to_string(st.role));
    o["position"] = position_json(st.position);
    if (st.path) {
      ordered_json p;
      ordered_json wps = ordered_json::array();
      for (const auto& w : st.path->waypoints) wps.push_back(position_json(w));
      p["waypoints"] = wps;
      p["speed_mps"] = st.path->speed_mps;
      p["repeat"] = st.path->repeat;
      o["path"] = p;
    }
    if (st.range_m) o["range_m"] = *st.range_m;
    stations.push_back(o);
  }
  j["stations"] = stations;

  ordered_json flows = ordered_json::array();
  for (const auto& f : s.flows) {
    ordered_json o;
    o["flow_id"] = f.flow_id;
    o["priority"] = f.priority;
    o["src"] = f.src;
    o["dst"] = f.dst;
    o["size_mean_bytes"] = f.size_mean_bytes;
    o["size_std_bytes"] = f.size_std_bytes;
    o["interval_us"] = f.interval_us;
    o["start_us"] = f.start_at.us();
    if (f.stop_at != FlowSpec{}.stop_at) o["stop_us"] = f.stop_at.us();
    flows.push_back(o);
  }
  j["flows"] = flows;
  return j.dump(2) + "\n";
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string scenario_hash(const Scenario& scenario) { return sha256_hex(emit_scenario(scenario)); }

}  // namespace edcasim
