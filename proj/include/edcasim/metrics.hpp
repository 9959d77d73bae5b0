#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "edcasim/sim_core.hpp"

namespace edcasim {

class AuditError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class DropReason : std::uint8_t { Queue, Retry, Unassociated, Wired };

std::string_view to_string(DropReason reason);

enum class FrameEventKind : std::uint8_t {
  Generated,
  Enqueued,
  TxStart,
  TxEnd,
  MacAcked,   // sender saw the ACK
  Forwarded,  // base station handed the frame to the wired link
  Delivered,  // arrived at the final destination
  Dropped,
};

std::string_view to_string(FrameEventKind kind);

/// Per-frame MAC/wired event, as emitted to the metrics sink.
struct FrameEvent {
  SimTime time;
  NodeId station = 0;
  FrameEventKind kind = FrameEventKind::Generated;
  std::uint64_t frame_id = 0;
  std::int32_t flow_id = -1;
  std::optional<DropReason> reason;
  std::uint32_t bytes = 0;  // payload size; used by Generated
};

struct FlowCounters {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_queue = 0;
  std::uint64_t dropped_retry = 0;
  std::uint64_t dropped_unassociated = 0;
  std::uint64_t dropped_wired = 0;
  std::uint64_t bytes_generated = 0;
  std::uint64_t bytes_delivered = 0;
  std::vector<SimTime> delay_samples;  // in delivery order

  std::uint64_t dropped_total() const {
    return dropped_queue + dropped_retry + dropped_unassociated + dropped_wired;
  }
};

/// Bytes delivered per fixed-width bin, per flow, starting at the end of
/// warmup.
class ThroughputSeries {
public:
  ThroughputSeries(SimTime start, SimTime end, SimTime bin_width);

  void add(std::int32_t flow_id, SimTime at, std::uint64_t bytes);
  void ensure_flow(std::int32_t flow_id);

  SimTime start() const { return start_; }
  SimTime bin_width() const { return bin_width_; }
  std::size_t bin_count() const { return bin_count_; }
  SimTime bin_start(std::size_t index) const { return start_ + bin_width_ * index; }
  const std::vector<std::uint64_t>& bins(std::int32_t flow_id) const;
  const std::map<std::int32_t, std::vector<std::uint64_t>>& all() const { return bins_; }

private:
  SimTime start_;
  SimTime bin_width_;
  std::size_t bin_count_;
  std::map<std::int32_t, std::vector<std::uint64_t>> bins_;
};

/// Empirical CDF of delay samples.
class DelayCdf {
public:
  explicit DelayCdf(std::span<const SimTime> samples);

  /// Fraction of samples <= d.
  double fraction_at(SimTime d) const;
  /// (distinct sample value, fraction <= value), ascending.
  std::vector<std::pair<SimTime, double>> points() const;
  std::size_t size() const { return sorted_.size(); }

private:
  std::vector<SimTime> sorted_;
};

/// Nearest-rank quantile: the ceil(q * n)-th smallest sample. nullopt when
/// there are no samples. q must lie in (0, 1].
std::optional<SimTime> delay_quantile(std::span<const SimTime> samples, double q);

/// Delivered over offered bytes; nullopt when nothing was offered.
std::optional<double> normalized_throughput(const FlowCounters& counters);

/// (high - low) / (high + low); 0 when both are zero.
double differentiation_index(double high, double low);

/// Per-flow accounting. A frame belongs to the measured population when it
/// was generated at or after warmup; each measured frame must resolve
/// (deliver or drop) at most once.
class MetricsCollector {
public:
  MetricsCollector(SimTime warmup, SimTime end, SimTime bin_width);

  void add_flow(std::int32_t flow_id);
  /// Throws AuditError for events about frames it never saw generated, or
  /// for a second resolution of the same frame.
  void record(const FrameEvent& event);

  const FlowCounters& counters(std::int32_t flow_id) const;
  const std::map<std::int32_t, FlowCounters>& flows() const { return flows_; }
  const ThroughputSeries& series() const { return series_; }
  SimTime warmup() const { return warmup_; }

  /// Measured frames not yet resolved.
  std::uint64_t in_flight(std::int32_t flow_id) const;

private:
  struct Pending {
    std::int32_t flow_id;
    SimTime created_at;
    std::uint32_t bytes;
    bool measured;
  };

  SimTime warmup_;
  std::map<std::int32_t, FlowCounters> flows_;
  std::unordered_map<std::uint64_t, Pending> pending_;
  std::unordered_set<std::uint64_t> resolved_;  // a copy may still be on the air (lost ACK)
  std::map<std::int32_t, std::uint64_t> in_flight_;
  ThroughputSeries series_;
};

}  // namespace edcasim
