#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edcasim/metrics.hpp"
#include "edcasim/scenario.hpp"
#include "edcasim/simulation.hpp"

namespace edcasim {

inline constexpr int kSummarySchemaVersion = 1;

struct FlowSummary {
  std::int32_t flow_id = 0;
  int priority = 0;
  std::string access_category;
  NodeId src = 0;
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_queue = 0;
  std::uint64_t dropped_retry = 0;
  std::uint64_t dropped_unassociated = 0;
  std::uint64_t dropped_wired = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t bytes_generated = 0;
  std::uint64_t bytes_delivered = 0;
  double throughput_Bps = 0.0;
  double throughput_bps = 0.0;
  std::optional<double> normalized_throughput;
  std::optional<std::uint64_t> delay_p50_us;
  std::optional<std::uint64_t> delay_p90_us;
  std::optional<std::uint64_t> delay_p99_us;

  std::uint64_t dropped_total() const {
    return dropped_queue + dropped_retry + dropped_unassociated + dropped_wired;
  }
  bool operator==(const FlowSummary&) const = default;
};

struct RoamingRecord {
  std::uint64_t time_us = 0;
  NodeId station = 0;
  std::string event;
  NodeId bs = 0;
  bool operator==(const RoamingRecord&) const = default;
};

struct RunSummary {
  std::string scenario_name;
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string mac_mode;
  double duration_s = 0.0;
  double warmup_s = 0.0;
  double load_multiplier = 1.0;
  std::vector<FlowSummary> flows;
  std::vector<RoamingRecord> roaming;
  std::uint64_t events_dispatched = 0;

  const FlowSummary& flow(std::int32_t flow_id) const;
  std::uint64_t total_generated() const;
  std::uint64_t total_delivered() const;
  std::uint64_t total_dropped() const;
  std::uint64_t total_in_flight() const;
  double total_throughput_Bps() const;
  bool operator==(const RunSummary&) const = default;
};

/// Builds the summary of a finished run.
RunSummary summarize(const Simulation& sim);

std::string summary_json(const RunSummary& summary);
RunSummary parse_summary_json(const std::string& text);

std::string throughput_csv(const ThroughputSeries& series);
std::string delays_csv(const MetricsCollector& metrics);
std::string delay_cdf_csv(const std::map<std::int32_t, std::vector<SimTime>>& delays);
std::map<std::int32_t, std::vector<SimTime>> parse_delays_csv(const std::string& text);
std::string format_event_row(const FrameEvent& event);
inline constexpr const char* kEventsHeader = "time_us,station,event,frame_id,flow_id,reason\n";

/// Human-readable per-flow table.
std::string format_summary_table(const RunSummary& summary);

/// Runs one simulation and writes throughput.csv, delays.csv, delay_cdf.csv,
/// summary.json (and events.csv when `trace` is set) into `out_dir`.
RunSummary run_to_directory(const Scenario& scenario, std::uint64_t seed,
                            const std::filesystem::path& out_dir, bool trace);

/// Runs without writing files.
RunSummary run_summary(const Scenario& scenario, std::uint64_t seed);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};
MeanStd mean_std(const std::vector<double>& values);

struct SweepRow {
  std::int32_t flow_id = 0;
  MeanStd throughput_Bps;
  MeanStd normalized_throughput;
  MeanStd delivered;
  MeanStd dropped;
  MeanStd delay_p50_us;
  MeanStd delay_p99_us;
};

std::vector<SweepRow> aggregate(const std::vector<RunSummary>& runs);

/// One run per seed, `jobs` at a time. With `out_dir`, each run writes its
/// files into out_dir/seed-<seed>.
std::vector<RunSummary> sweep(const Scenario& scenario, const std::vector<std::uint64_t>& seeds,
                              unsigned jobs,
                              const std::optional<std::filesystem::path>& out_dir);

std::string sweep_json(const Scenario& scenario, const std::vector<RunSummary>& runs,
                       const std::vector<SweepRow>& rows);
std::string format_sweep_table(const std::vector<SweepRow>& rows);

/// Saturated DCF cell: n QSTAs around one BS, fixed-size frames, unbounded
/// retries.
Scenario dcf_saturation_scenario(std::uint32_t n_stations, std::uint32_t payload_bytes,
                                 double measured_s = 60.0);

struct DcfValidation {
  std::uint32_t n_stations = 0;
  std::uint32_t payload_bytes = 0;
  std::uint64_t seed = 0;
  double measured_s = 0.0;
  double simulated_bps = 0.0;
  double analytic_bps = 0.0;
  double tau = 0.0;
  double p = 0.0;
  double relative_error = 0.0;
};

DcfValidation validate_dcf(std::uint32_t n_stations, std::uint32_t payload_bytes,
                           std::uint64_t seed, double measured_s = 60.0);
std::string format_dcf_validation(const DcfValidation& v);

/// Re-derives delay quantiles and delay_cdf.csv from the stored delays.csv
/// (and checks the counters against events.csv when present). Rewrites
/// delay_cdf.csv and summary.json; throws AuditError when the stored summary
/// disagrees with the raw data.
RunSummary report_directory(const std::filesystem::path& dir);

/// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace edcasim
