#pragma once

#include <cstdint>

#include "edcasim/mac_edcf.hpp"
#include "edcasim/sim_core.hpp"

namespace edcasim {

/// A constant-bit-rate source: strictly periodic arrivals, normally
/// distributed packet sizes truncated to [1, 2304] bytes.
struct FlowSpec {
  std::int32_t flow_id = 0;
  int priority = 0;
  NodeId src = 0;
  NodeId dst = 0;
  double size_mean_bytes = 300.0;
  double size_std_bytes = 0.0;
  std::uint64_t interval_us = 40'000;
  SimTime start_at;
  SimTime stop_at = SimTime(~std::uint64_t{0});

  void validate() const;
  bool operator==(const FlowSpec&) const = default;
};

/// Mean offered load in bits per second.
double offered_rate_bps(const FlowSpec& spec);

/// Builds the next packet of a flow arriving at `now`. The frame's wireless
/// next hop (`dst`) is left for the caller to fill in.
Frame next_packet(const FlowSpec& spec, SimTime now, std::uint64_t frame_id, RandomStream& rng);

/// Periodic arrival schedule of one flow.
class TrafficSource {
public:
  TrafficSource(FlowSpec spec, std::uint64_t interval_us);

  const FlowSpec& spec() const { return spec_; }
  std::uint64_t interval_us() const { return interval_us_; }

  /// Next arrival instant, or nullopt once past stop_at.
  std::optional<SimTime> next_arrival() const;
  Frame emit(SimTime now, std::uint64_t frame_id, RandomStream& rng);

private:
  FlowSpec spec_;
  std::uint64_t interval_us_;
  std::uint64_t emitted_ = 0;
};

}  // namespace edcasim
