#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "edcasim/geometry.hpp"
#include "edcasim/sim_core.hpp"

namespace edcasim {

inline constexpr std::uint32_t kMaxMsduBytes = 2304;

/// DSSS-style PHY timing. Defaults are the 1 Mb/s long-preamble values.
struct RadioParams {
  std::uint64_t data_rate_bps = 1'000'000;
  std::uint64_t slot_us = 20;
  std::uint64_t sifs_us = 10;
  std::uint64_t difs_us = 50;
  std::uint64_t preamble_us = 192;
  std::uint32_t mac_overhead_bytes = 28;
  std::uint32_t ack_bytes = 14;
  double range_m = 150.0;
  std::uint64_t propagation_delay_us = 0;

  SimTime slot() const { return SimTime(slot_us); }
  SimTime sifs() const { return SimTime(sifs_us); }
  SimTime difs() const { return SimTime(difs_us); }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool operator==(const RadioParams&) const = default;
};

/// preamble + ceil(8 * (payload + MAC overhead) / rate). Payload must be in
/// [1, 2304] bytes.
SimTime frame_airtime(std::uint32_t payload_bytes, const RadioParams& radio);

/// ACK airtime; the ACK length already includes its own header and FCS.
SimTime ack_airtime(const RadioParams& radio);

struct Transmission {
  std::uint64_t id = 0;
  std::uint64_t frame_id = 0;
  NodeId transmitter = 0;
  SimTime start;
  SimTime end;
  Position origin;
  double range_m = 0.0;
  bool active = true;
};

enum class Reception { Success, Collision, OutOfRange };

/// Binary-disc radio medium. A transmission is detectable wherever the
/// listener lies within the transmitter's range; any detectable overlap at a
/// receiver destroys both frames (no capture).
class Channel {
public:
  using PositionFn = std::function<Position(NodeId, SimTime)>;

  explicit Channel(PositionFn position_of) : position_of_(std::move(position_of)) {}

  void add_node(NodeId id, double range_m);
  double range_of(NodeId id) const;

  /// Starts a transmission; returns it (the reference is valid until the
  /// next begin/prune).
  const Transmission& begin(NodeId transmitter, std::uint64_t frame_id, SimTime start,
                            SimTime duration);
  void end(std::uint64_t tx_id);
  const Transmission& get(std::uint64_t tx_id) const;

  /// Registered nodes (the transmitter included) that detect the transmission.
  std::vector<NodeId> listeners(const Transmission& tx) const;

  bool carrier_sensed(NodeId listener, SimTime at) const;

  Reception resolve_reception(NodeId receiver, std::uint64_t tx_id) const;

  /// Drops history entries that can no longer overlap anything new.
  void prune(SimTime now);

  std::size_t history_size() const { return history_.size(); }

private:
  bool detects(const Transmission& tx, Position listener) const;
  std::size_t index_of(std::uint64_t tx_id) const;

  PositionFn position_of_;
  std::map<NodeId, double> ranges_;
  std::deque<Transmission> history_;  // ordered by start (and by id)
  std::uint64_t next_id_ = 1;
};

struct WiredLinkParams {
  std::uint64_t rate_bps = 5'000'000;
  std::uint64_t delay_us = 2000;
  std::size_t queue_capacity = 100;

  void validate() const;
  bool operator==(const WiredLinkParams&) const = default;
};

/// Point-to-point FIFO link from a base station to the wired sink.
class WiredLink {
public:
  explicit WiredLink(WiredLinkParams params) : params_(params) { params_.validate(); }

  /// Delivery time at the far end, or nullopt when the queue is full.
  std::optional<SimTime> enqueue(SimTime now, std::uint32_t bytes);

  SimTime serialization(std::uint32_t bytes) const;
  std::size_t backlog(SimTime now);
  const WiredLinkParams& params() const { return params_; }

private:
  WiredLinkParams params_;
  std::deque<SimTime> departures_;  // serialization end of frames still in the queue
};

}  // namespace edcasim
