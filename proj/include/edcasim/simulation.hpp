#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "edcasim/mac_edcf.hpp"
#include "edcasim/metrics.hpp"
#include "edcasim/mobility.hpp"
#include "edcasim/phy_channel.hpp"
#include "edcasim/scenario.hpp"
#include "edcasim/sim_core.hpp"
#include "edcasim/traffic.hpp"

namespace edcasim {

inline constexpr std::uint32_t kManagementFrameBytes = 20;

struct RoamingEvent {
  enum class Kind : std::uint8_t { RequestSent, Associated, HandshakeAborted, Disassociated };
  SimTime time;
  NodeId station = 0;
  Kind kind = Kind::RequestSent;
  NodeId bs = 0;
};

std::string_view to_string(RoamingEvent::Kind kind);

/// One run of a scenario: owns every piece of mutable state (clock, random
/// stream, channel, stations, metrics).
class Simulation {
public:
  using FrameObserver = std::function<void(const FrameEvent&)>;

  Simulation(const Scenario& scenario, std::uint64_t seed);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Receives every frame event (management frames included) as it happens.
  void set_observer(FrameObserver observer) { observer_ = std::move(observer); }

  /// Runs to the scenario duration, then audits frame conservation. Throws
  /// AuditError when an audit fails.
  void run();

  const Scenario& scenario() const { return scenario_; }
  std::uint64_t seed() const { return seed_; }
  const MetricsCollector& metrics() const { return metrics_; }
  const std::vector<RoamingEvent>& roaming_log() const { return roaming_; }
  std::uint64_t events_dispatched() const { return events_dispatched_; }

  const StationMac& mac(NodeId id) const;
  const AssociationState& association(NodeId id) const;
  Position position(NodeId id, SimTime t) const;

private:
  struct Node;
  struct TxInfo {
    NodeId transmitter = 0;
    Frame frame;
    bool is_ack = false;
    NodeId ack_to = 0;
    std::uint64_t ack_for = 0;
    std::vector<NodeId> listeners;
  };
  struct PendingStart {
    enum class Kind : std::uint8_t { Ack, BurstNext };
    Kind kind = Kind::Ack;
    NodeId node = 0;
    NodeId ack_to = 0;
    std::uint64_t ack_for = 0;
  };
  enum class LedgerState : std::uint8_t { InMac, InWired };
  struct LedgerEntry {
    std::int32_t flow_id;
    NodeId src;
    LedgerState state;
    SimTime created_at;
  };

  Node& node(NodeId id);
  const Node& node(NodeId id) const;

  void dispatch(const EventRecord& ev);
  void on_packet_arrival(std::size_t flow_index);
  void on_access(Node& n, std::uint64_t token);
  void on_tx_start(std::uint64_t token);
  void on_tx_end(std::uint64_t tx_id);
  void on_ack_timeout(Node& n, std::uint64_t token);
  void on_wired_delivery(NodeId bs, std::uint64_t frame_id);
  void on_mobility_tick(Node& n);
  void on_range_crossing(Node& n, std::uint64_t token);
  void on_handshake_step(Node& n, std::uint64_t token);

  void reschedule_access(Node& n);
  void start_exchange(Node& n, std::size_t queue_index);
  void transmit_head(Node& n);
  void send_ack(NodeId from, NodeId to, std::uint64_t for_frame);
  void exchange_succeeded(Node& n);
  void end_exchange(Node& n, bool redraw_backoff);
  bool accepts(const Node& rx, const Frame& frame) const;
  void receive(Node& rx, const Frame& frame);

  void evaluate_association(Node& n);
  void schedule_next_crossing(Node& n);
  void flush_for_disassociation(Node& n);
  void log_roaming(NodeId station, RoamingEvent::Kind kind, NodeId bs);

  void emit(FrameEventKind kind, NodeId station, const Frame& frame,
            std::optional<DropReason> reason = std::nullopt);
  void drop(NodeId station, const Frame& frame, DropReason reason);
  void audit() const;

  Scenario scenario_;
  std::uint64_t seed_;
  SimTime end_;
  EventQueue queue_;
  RandomStream rng_;
  Channel channel_;
  MetricsCollector metrics_;
  FrameObserver observer_;

  std::vector<std::unique_ptr<Node>> nodes_;
  std::map<NodeId, std::size_t> node_index_;
  std::vector<BaseStationView> base_stations_;
  NodeId sink_id_ = 0;
  std::vector<TrafficSource> sources_;

  std::unordered_map<std::uint64_t, TxInfo> tx_info_;
  std::unordered_map<std::uint64_t, PendingStart> pending_starts_;
  std::uint64_t next_start_token_ = 1;
  std::unordered_map<std::uint64_t, Frame> wired_transit_;
  std::unordered_map<std::uint64_t, LedgerEntry> ledger_;
  std::uint64_t next_frame_id_ = 1;

  std::vector<RoamingEvent> roaming_;
  std::uint64_t events_dispatched_ = 0;
};

}  // namespace edcasim
