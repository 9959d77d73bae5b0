#include "edcasim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "edcasim/analytic_oracle.hpp"

namespace edcasim {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

template <typename T>
ojson opt(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

template <typename T>
std::optional<T> get_opt(const ojson& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<T>();
}

std::optional<std::uint64_t> quantile_us(const std::vector<SimTime>& samples, double q) {
  const auto v = delay_quantile(samples, q);
  if (!v) return std::nullopt;
  return v->us();
}

void fill_quantiles(FlowSummary& f, const std::vector<SimTime>& samples) {
  f.delay_p50_us = quantile_us(samples, 0.50);
  f.delay_p90_us = quantile_us(samples, 0.90);
  f.delay_p99_us = quantile_us(samples, 0.99);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(const std::string& name, const std::array<Enum, N>& values) {
  for (Enum v : values) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

constexpr std::array<FrameEventKind, 8> kFrameEventKinds = {
    FrameEventKind::Generated, FrameEventKind::Enqueued, FrameEventKind::TxStart,
    FrameEventKind::TxEnd,     FrameEventKind::MacAcked, FrameEventKind::Forwarded,
    FrameEventKind::Delivered, FrameEventKind::Dropped};
constexpr std::array<DropReason, 4> kDropReasons = {DropReason::Queue, DropReason::Retry,
                                                     DropReason::Unassociated, DropReason::Wired};

std::uint64_t parse_u64(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("malformed ") + what + ": '" + s + "'");
  }
}

std::int64_t parse_i64(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("malformed ") + what + ": '" + s + "'");
  }
}

}  // namespace

// --- RunSummary ----------------------------------------------------------------

const FlowSummary& RunSummary::flow(std::int32_t flow_id) const {
  for (const auto& f : flows) {
    if (f.flow_id == flow_id) return f;
  }
  throw std::out_of_range("no flow " + std::to_string(flow_id) + " in summary");
}

std::uint64_t RunSummary::total_generated() const {
  std::uint64_t s = 0;
  for (const auto& f : flows) s += f.generated;
  return s;
}

std::uint64_t RunSummary::total_delivered() const {
  std::uint64_t s = 0;
  for (const auto& f : flows) s += f.delivered;
  return s;
}

std::uint64_t RunSummary::total_dropped() const {
  std::uint64_t s = 0;
  for (const auto& f : flows) s += f.dropped_total();
  return s;
}

std::uint64_t RunSummary::total_in_flight() const {
  std::uint64_t s = 0;
  for (const auto& f : flows) s += f.in_flight;
  return s;
}

double RunSummary::total_throughput_Bps() const {
  double s = 0.0;
  for (const auto& f : flows) s += f.throughput_Bps;
  return s;
}

RunSummary summarize(const Simulation& sim) {
  const Scenario& sc = sim.scenario();
  const MetricsCollector& m = sim.metrics();
  const double window_s = sc.duration_s - sc.warmup_s;

  RunSummary s;
  s.scenario_name = sc.name;
  s.scenario_hash = scenario_hash(sc);
  s.seed = sim.seed();
  s.mac_mode = std::string(to_string(sc.mac_mode));
  s.duration_s = sc.duration_s;
  s.warmup_s = sc.warmup_s;
  s.load_multiplier = sc.load_multiplier;
  s.events_dispatched = sim.events_dispatched();
  for (const auto& spec : sc.flows) {
    const FlowCounters& c = m.counters(spec.flow_id);
    FlowSummary f;
    f.flow_id = spec.flow_id;
    f.priority = spec.priority;
    f.access_category = std::string(to_string(classify(spec.priority)));
    f.src = spec.src;
    f.generated = c.generated;
    f.delivered = c.delivered;
    f.dropped_queue = c.dropped_queue;
    f.dropped_retry = c.dropped_retry;
    f.dropped_unassociated = c.dropped_unassociated;
    f.dropped_wired = c.dropped_wired;
    f.in_flight = m.in_flight(spec.flow_id);
    f.bytes_generated = c.bytes_generated;
    f.bytes_delivered = c.bytes_delivered;
    f.throughput_Bps = static_cast<double>(c.bytes_delivered) / window_s;
    f.throughput_bps = 8.0 * f.throughput_Bps;
    f.normalized_throughput = normalized_throughput(c);
    fill_quantiles(f, c.delay_samples);
    s.flows.push_back(std::move(f));
  }
  for (const auto& r : sim.roaming_log()) {
    s.roaming.push_back({r.time.us(), r.station, std::string(to_string(r.kind)), r.bs});
  }
  return s;
}

std::string summary_json(const RunSummary& s) {
  ojson j;
  j["schema"] = kSummarySchemaVersion;
  j["scenario"] = s.scenario_name;
  j["scenario_hash"] = s.scenario_hash;
  j["seed"] = s.seed;
  j["mac_mode"] = s.mac_mode;
  j["duration_s"] = s.duration_s;
  j["warmup_s"] = s.warmup_s;
  j["load_multiplier"] = s.load_multiplier;
  j["flows"] = ojson::array();
  for (const auto& f : s.flows) {
    ojson fj;
    fj["flow_id"] = f.flow_id;
    fj["priority"] = f.priority;
    fj["access_category"] = f.access_category;
    fj["src"] = f.src;
    fj["generated"] = f.generated;
    fj["delivered"] = f.delivered;
    fj["dropped_queue"] = f.dropped_queue;
    fj["dropped_retry"] = f.dropped_retry;
    fj["dropped_unassociated"] = f.dropped_unassociated;
    fj["dropped_wired"] = f.dropped_wired;
    fj["in_flight"] = f.in_flight;
    fj["bytes_generated"] = f.bytes_generated;
    fj["bytes_delivered"] = f.bytes_delivered;
    fj["throughput_Bps"] = f.throughput_Bps;
    fj["throughput_bps"] = f.throughput_bps;
    fj["normalized_throughput"] = opt(f.normalized_throughput);
    fj["delay_p50_us"] = opt(f.delay_p50_us);
    fj["delay_p90_us"] = opt(f.delay_p90_us);
    fj["delay_p99_us"] = opt(f.delay_p99_us);
    j["flows"].push_back(std::move(fj));
  }
  ojson totals;
  totals["generated"] = s.total_generated();
  totals["delivered"] = s.total_delivered();
  totals["dropped"] = s.total_dropped();
  totals["in_flight"] = s.total_in_flight();
  totals["throughput_Bps"] = s.total_throughput_Bps();
  totals["throughput_bps"] = 8.0 * s.total_throughput_Bps();
  j["totals"] = std::move(totals);
  j["roaming"] = ojson::array();
  for (const auto& r : s.roaming) {
    j["roaming"].push_back({{"time_us", r.time_us}, {"station", r.station},
                            {"event", r.event}, {"bs", r.bs}});
  }
  j["events_dispatched"] = s.events_dispatched;
  return j.dump(2) + "\n";
}

RunSummary parse_summary_json(const std::string& text) {
  try {
    const ojson j = ojson::parse(text);
    if (j.at("schema").get<int>() != kSummarySchemaVersion) {
      throw ConfigError("summary.json: unsupported schema version");
    }
    RunSummary s;
    s.scenario_name = j.at("scenario").get<std::string>();
    s.scenario_hash = j.at("scenario_hash").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.mac_mode = j.at("mac_mode").get<std::string>();
    s.duration_s = j.at("duration_s").get<double>();
    s.warmup_s = j.at("warmup_s").get<double>();
    s.load_multiplier = j.at("load_multiplier").get<double>();
    for (const auto& fj : j.at("flows")) {
      FlowSummary f;
      f.flow_id = fj.at("flow_id").get<std::int32_t>();
      f.priority = fj.at("priority").get<int>();
      f.access_category = fj.at("access_category").get<std::string>();
      f.src = fj.at("src").get<NodeId>();
      f.generated = fj.at("generated").get<std::uint64_t>();
      f.delivered = fj.at("delivered").get<std::uint64_t>();
      f.dropped_queue = fj.at("dropped_queue").get<std::uint64_t>();
      f.dropped_retry = fj.at("dropped_retry").get<std::uint64_t>();
      f.dropped_unassociated = fj.at("dropped_unassociated").get<std::uint64_t>();
      f.dropped_wired = fj.at("dropped_wired").get<std::uint64_t>();
      f.in_flight = fj.at("in_flight").get<std::uint64_t>();
      f.bytes_generated = fj.at("bytes_generated").get<std::uint64_t>();
      f.bytes_delivered = fj.at("bytes_delivered").get<std::uint64_t>();
      f.throughput_Bps = fj.at("throughput_Bps").get<double>();
      f.throughput_bps = fj.at("throughput_bps").get<double>();
      f.normalized_throughput = get_opt<double>(fj, "normalized_throughput");
      f.delay_p50_us = get_opt<std::uint64_t>(fj, "delay_p50_us");
      f.delay_p90_us = get_opt<std::uint64_t>(fj, "delay_p90_us");
      f.delay_p99_us = get_opt<std::uint64_t>(fj, "delay_p99_us");
      s.flows.push_back(std::move(f));
    }
    for (const auto& rj : j.at("roaming")) {
      s.roaming.push_back({rj.at("time_us").get<std::uint64_t>(), rj.at("station").get<NodeId>(),
                           rj.at("event").get<std::string>(), rj.at("bs").get<NodeId>()});
    }
    s.events_dispatched = j.at("events_dispatched").get<std::uint64_t>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("summary.json: ") + e.what());
  }
}

// --- CSV ----------------------------------------------------------------------

std::string throughput_csv(const ThroughputSeries& series) {
  std::string out = "time_s,flow_id,bytes,bps\n";
  const double width_s = series.bin_width().seconds();
  for (std::size_t i = 0; i < series.bin_count(); ++i) {
    const std::string t = fmt("%.3f", series.bin_start(i).seconds());
    for (const auto& [flow_id, bins] : series.all()) {
      out += t + "," + std::to_string(flow_id) + "," + std::to_string(bins[i]) + "," +
             fmt("%.3f", 8.0 * static_cast<double>(bins[i]) / width_s) + "\n";
    }
  }
  return out;
}

std::string delays_csv(const MetricsCollector& metrics) {
  std::string out = "flow_id,delay_us\n";
  for (const auto& [flow_id, c] : metrics.flows()) {
    for (SimTime d : c.delay_samples) {
      out += std::to_string(flow_id) + "," + std::to_string(d.us()) + "\n";
    }
  }
  return out;
}

std::string delay_cdf_csv(const std::map<std::int32_t, std::vector<SimTime>>& delays) {
  std::string out = "flow_id,delay_us,fraction\n";
  for (const auto& [flow_id, samples] : delays) {
    for (const auto& [value, fraction] : DelayCdf(samples).points()) {
      out += std::to_string(flow_id) + "," + std::to_string(value.us()) + "," +
             fmt("%.9f", fraction) + "\n";
    }
  }
  return out;
}

std::map<std::int32_t, std::vector<SimTime>> parse_delays_csv(const std::string& text) {
  std::map<std::int32_t, std::vector<SimTime>> out;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "flow_id,delay_us") {
    throw ConfigError("delays.csv: missing header 'flow_id,delay_us'");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 2) throw ConfigError("delays.csv: malformed row '" + line + "'");
    out[static_cast<std::int32_t>(parse_i64(cols[0], "flow_id"))].push_back(
        SimTime(parse_u64(cols[1], "delay_us")));
  }
  return out;
}

std::string format_event_row(const FrameEvent& ev) {
  std::string row = std::to_string(ev.time.us()) + "," + std::to_string(ev.station) + "," +
                    std::string(to_string(ev.kind)) + "," + std::to_string(ev.frame_id) + "," +
                    std::to_string(ev.flow_id) + ",";
  if (ev.reason) row += to_string(*ev.reason);
  row += "\n";
  return row;
}

std::string format_summary_table(const RunSummary& s) {
  std::string out;
  out += "scenario " + s.scenario_name + "  seed " + std::to_string(s.seed) + "  " + s.mac_mode +
         "  load x" + fmt("%g", s.load_multiplier) + "\n";
  out += "flow  ac   generated  delivered  dropped  in_flight   B/s        norm    p50_us    "
         "p99_us\n";
  auto opt_u = [](const std::optional<std::uint64_t>& v) {
    return v ? std::to_string(*v) : std::string("-");
  };
  for (const auto& f : s.flows) {
    char line[256];
    std::snprintf(line, sizeof line, "%-5d %-4s %-10llu %-10llu %-8llu %-11llu %-10.1f %-7s %-9s %s\n",
                  f.flow_id, f.access_category.c_str(),
                  static_cast<unsigned long long>(f.generated),
                  static_cast<unsigned long long>(f.delivered),
                  static_cast<unsigned long long>(f.dropped_total()),
                  static_cast<unsigned long long>(f.in_flight), f.throughput_Bps,
                  f.normalized_throughput ? fmt("%.4f", *f.normalized_throughput).c_str() : "-",
                  opt_u(f.delay_p50_us).c_str(), opt_u(f.delay_p99_us).c_str());
    out += line;
  }
  out += "total generated " + std::to_string(s.total_generated()) + ", delivered " +
         std::to_string(s.total_delivered()) + ", lost " + std::to_string(s.total_dropped()) +
         "\n";
  return out;
}

// --- files -------------------------------------------------------------------

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw ConfigError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// --- runs --------------------------------------------------------------------

RunSummary run_summary(const Scenario& scenario, std::uint64_t seed) {
  Simulation sim(scenario, seed);
  sim.run();
  return summarize(sim);
}

RunSummary run_to_directory(const Scenario& scenario, std::uint64_t seed,
                            const std::filesystem::path& out_dir, bool trace) {
  std::filesystem::create_directories(out_dir);
  Simulation sim(scenario, seed);
  std::string events;
  if (trace) {
    events = kEventsHeader;
    sim.set_observer([&events](const FrameEvent& ev) { events += format_event_row(ev); });
  }
  sim.run();
  RunSummary summary = summarize(sim);

  std::map<std::int32_t, std::vector<SimTime>> delays;
  for (const auto& [flow_id, c] : sim.metrics().flows()) delays[flow_id] = c.delay_samples;

  write_file_atomic(out_dir / "throughput.csv", throughput_csv(sim.metrics().series()));
  write_file_atomic(out_dir / "delays.csv", delays_csv(sim.metrics()));
  write_file_atomic(out_dir / "delay_cdf.csv", delay_cdf_csv(delays));
  write_file_atomic(out_dir / "summary.json", summary_json(summary));
  if (trace) write_file_atomic(out_dir / "events.csv", events);
  return summary;
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean_std: no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

std::vector<SweepRow> aggregate(const std::vector<RunSummary>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
  std::vector<SweepRow> rows;
  for (const auto& f0 : runs.front().flows) {
    std::vector<double> tput, norm, delivered, dropped, p50, p99;
    for (const auto& run : runs) {
      const FlowSummary& f = run.flow(f0.flow_id);
      tput.push_back(f.throughput_Bps);
      norm.push_back(f.normalized_throughput.value_or(0.0));
      delivered.push_back(static_cast<double>(f.delivered));
      dropped.push_back(static_cast<double>(f.dropped_total()));
      p50.push_back(static_cast<double>(f.delay_p50_us.value_or(0)));
      p99.push_back(static_cast<double>(f.delay_p99_us.value_or(0)));
    }
    rows.push_back({f0.flow_id, mean_std(tput), mean_std(norm), mean_std(delivered),
                    mean_std(dropped), mean_std(p50), mean_std(p99)});
  }
  return rows;
}

std::vector<RunSummary> sweep(const Scenario& scenario, const std::vector<std::uint64_t>& seeds,
                              unsigned jobs,
                              const std::optional<std::filesystem::path>& out_dir) {
  if (seeds.empty()) throw ConfigError("sweep: at least one seed is required");
  std::vector<RunSummary> results(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        results[i] = out_dir ? run_to_directory(scenario, seeds[i],
                                                *out_dir / ("seed-" + std::to_string(seeds[i])),
                                                false)
                             : run_summary(scenario, seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_workers = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(seeds.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::string sweep_json(const Scenario& scenario, const std::vector<RunSummary>& runs,
                       const std::vector<SweepRow>& rows) {
  auto ms = [](const MeanStd& m) { return ojson{{"mean", m.mean}, {"std", m.std}}; };
  ojson j;
  j["schema"] = kSummarySchemaVersion;
  j["scenario"] = scenario.name;
  j["scenario_hash"] = scenario_hash(scenario);
  j["seeds"] = ojson::array();
  for (const auto& r : runs) j["seeds"].push_back(r.seed);
  j["flows"] = ojson::array();
  for (const auto& r : rows) {
    j["flows"].push_back({{"flow_id", r.flow_id},
                          {"throughput_Bps", ms(r.throughput_Bps)},
                          {"normalized_throughput", ms(r.normalized_throughput)},
                          {"delivered", ms(r.delivered)},
                          {"dropped", ms(r.dropped)},
                          {"delay_p50_us", ms(r.delay_p50_us)},
                          {"delay_p99_us", ms(r.delay_p99_us)}});
  }
  return j.dump(2) + "\n";
}

std::string format_sweep_table(const std::vector<SweepRow>& rows) {
  std::string out = "flow  B/s mean    B/s std    norm mean  dropped mean  p50_us mean  p99_us mean\n";
  for (const auto& r : rows) {
    char line[256];
    std::snprintf(line, sizeof line, "%-5d %-12.1f %-10.1f %-10.4f %-13.1f %-12.0f %.0f\n",
                  r.flow_id, r.throughput_Bps.mean, r.throughput_Bps.std,
                  r.normalized_throughput.mean, r.dropped.mean, r.delay_p50_us.mean,
                  r.delay_p99_us.mean);
    out += line;
  }
  return out;
}

// --- DCF validation ------------------------------------------------------------

Scenario dcf_saturation_scenario(std::uint32_t n_stations, std::uint32_t payload_bytes,
                                 double measured_s) {
  if (n_stations < 2) throw ConfigError("validate-dcf: --stations must be >= 2");
  if (payload_bytes < 1 || payload_bytes > kMaxMsduBytes) {
    throw ConfigError("validate-dcf: --payload must lie in [1, 2304]");
  }
  if (!(measured_s > 0.0)) throw ConfigError("validate-dcf: measured time must be positive");
  Scenario s;
  s.name = "dcf-saturation";
  s.mac_mode = MacMode::Dcf;
  s.warmup_s = 5.0;
  s.duration_s = s.warmup_s + measured_s;
  s.dcf.retry_limit = ~std::uint32_t{0};
  s.stations.push_back({100, StationRole::BaseStation, {0.0, 0.0}, std::nullopt, std::nullopt});
  s.stations.push_back({200, StationRole::WiredSink, {0.0, 0.0}, std::nullopt, std::nullopt});
  // Arrivals at twice the single-station frame airtime rate keep every queue full.
  const std::uint64_t interval = std::max<std::uint64_t>(1, frame_airtime(payload_bytes, s.radio).us() / 2);
  for (std::uint32_t i = 1; i <= n_stations; ++i) {
    const double angle = 2.0 * std::numbers::pi * (i - 1) / n_stations;
    s.stations.push_back({i, StationRole::Qsta, {30.0 * std::cos(angle), 30.0 * std::sin(angle)},
                          std::nullopt, std::nullopt});
    FlowSpec f;
    f.flow_id = static_cast<std::int32_t>(i);
    f.priority = 0;
    f.src = i;
    f.dst = 200;
    f.size_mean_bytes = payload_bytes;
    f.size_std_bytes = 0.0;
    f.interval_us = interval;
    f.start_at = SimTime::millis(i);
    s.flows.push_back(f);
  }
  s.validate();
  return s;
}

DcfValidation validate_dcf(std::uint32_t n_stations, std::uint32_t payload_bytes,
                           std::uint64_t seed, double measured_s) {
  const Scenario sc = dcf_saturation_scenario(n_stations, payload_bytes, measured_s);
  Simulation sim(sc, seed);
  // Saturation throughput counts every delivery inside the window, whatever
  // the frame's creation time.
  const SimTime from = sc.warmup();
  std::uint64_t bytes = 0;
  sim.set_observer([&](const FrameEvent& ev) {
    if (ev.kind == FrameEventKind::Delivered && ev.time >= from) bytes += ev.bytes;
  });
  sim.run();

  oracle::SaturationModelParams params;
  params.n = n_stations;
  params.w = sc.dcf.cw_min + 1;
  params.m = static_cast<std::uint32_t>(std::lround(std::log2((sc.dcf.cw_max + 1.0) / params.w)));
  params.payload_bytes = payload_bytes;
  params.radio = sc.radio;
  const auto sol = oracle::solve_tau(params);

  DcfValidation v;
  v.n_stations = n_stations;
  v.payload_bytes = payload_bytes;
  v.seed = seed;
  v.measured_s = measured_s;
  v.simulated_bps = 8.0 * static_cast<double>(bytes) / measured_s;
  v.analytic_bps = oracle::saturation_throughput_bps(params, sol.tau);
  v.tau = sol.tau;
  v.p = sol.p;
  v.relative_error = std::abs(v.simulated_bps - v.analytic_bps) / v.analytic_bps;
  return v;
}

std::string format_dcf_validation(const DcfValidation& v) {
  std::string out;
  out += "stations " + std::to_string(v.n_stations) + ", payload " +
         std::to_string(v.payload_bytes) + " B, seed " + std::to_string(v.seed) + ", " +
         fmt("%g", v.measured_s) + " s measured\n";
  out += "analytic tau " + fmt("%.6f", v.tau) + ", p " + fmt("%.6f", v.p) + "\n";
  out += "simulated " + fmt("%.1f", v.simulated_bps) + " bit/s\n";
  out += "analytic  " + fmt("%.1f", v.analytic_bps) + " bit/s\n";
  out += "relative error " + fmt("%.4f", v.relative_error) + "\n";
  return out;
}

// --- report --------------------------------------------------------------------

RunSummary report_directory(const std::filesystem::path& dir) {
  RunSummary stored = parse_summary_json(read_file(dir / "summary.json"));
  const auto delays = parse_delays_csv(read_file(dir / "delays.csv"));

  RunSummary rebuilt = stored;
  for (auto& f : rebuilt.flows) {
    auto it = delays.find(f.flow_id);
    const std::vector<SimTime> none;
    const auto& samples = it == delays.end() ? none : it->second;
    if (samples.size() != f.delivered) {
      throw AuditError("flow " + std::to_string(f.flow_id) + ": delays.csv has " +
                       std::to_string(samples.size()) + " samples, summary says " +
                       std::to_string(f.delivered) + " delivered");
    }
    fill_quantiles(f, samples);
  }
  for (const auto& [flow_id, samples] : delays) {
    (void)samples;
    rebuilt.flow(flow_id);  // throws for flows the summary does not know
  }

  const auto events_path = dir / "events.csv";
  if (std::filesystem::exists(events_path)) {
    const SimTime end = SimTime::seconds(stored.duration_s);
    MetricsCollector replay(SimTime::seconds(stored.warmup_s), end, SimTime::seconds(1.0));
    for (const auto& f : stored.flows) replay.add_flow(f.flow_id);
    std::istringstream in(read_file(events_path));
    std::string line;
    std::getline(in, line);
    if (line + "\n" != kEventsHeader) throw ConfigError("events.csv: unexpected header");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cols = split(line, ',');
      if (cols.size() != 6) throw ConfigError("events.csv: malformed row '" + line + "'");
      FrameEvent ev;
      ev.time = SimTime(parse_u64(cols[0], "time_us"));
      ev.station = static_cast<NodeId>(parse_u64(cols[1], "station"));
      const auto kind = parse_enum(cols[2], kFrameEventKinds);
      if (!kind) throw ConfigError("events.csv: unknown event '" + cols[2] + "'");
      ev.kind = *kind;
      ev.frame_id = parse_u64(cols[3], "frame_id");
      ev.flow_id = static_cast<std::int32_t>(parse_i64(cols[4], "flow_id"));
      if (!cols[5].empty()) {
        ev.reason = parse_enum(cols[5], kDropReasons);
        if (!ev.reason) throw ConfigError("events.csv: unknown reason '" + cols[5] + "'");
      }
      replay.record(ev);
    }
    for (const auto& f : rebuilt.flows) {
      const FlowCounters& c = replay.counters(f.flow_id);
      const auto it = delays.find(f.flow_id);
      const bool same_delays =
          it == delays.end() ? c.delay_samples.empty() : c.delay_samples == it->second;
      if (c.generated != f.generated || c.delivered != f.delivered ||
          c.dropped_queue != f.dropped_queue || c.dropped_retry != f.dropped_retry ||
          c.dropped_unassociated != f.dropped_unassociated ||
          c.dropped_wired != f.dropped_wired || replay.in_flight(f.flow_id) != f.in_flight ||
          !same_delays) {
        throw AuditError("flow " + std::to_string(f.flow_id) +
                         ": events.csv disagrees with summary.json");
      }
    }
  }

  if (rebuilt != stored) {
    throw AuditError("summary.json delay quantiles disagree with delays.csv");
  }
  write_file_atomic(dir / "delay_cdf.csv", delay_cdf_csv(delays));
  write_file_atomic(dir / "summary.json", summary_json(rebuilt));
  return rebuilt;
}

}  // namespace edcasim
