#include "edcasim/simulation.hpp"

#include <algorithm>
#include <string>

namespace edcasim {

std::string_view to_string(RoamingEvent::Kind kind) {
  switch (kind) {
    case RoamingEvent::Kind::RequestSent: return "request-sent";
    case RoamingEvent::Kind::Associated: return "associated";
    case RoamingEvent::Kind::HandshakeAborted: return "handshake-aborted";
    case RoamingEvent::Kind::Disassociated: return "disassociated";
  }
  return "?";
}

struct Simulation::Node {
  struct Exchange {
    std::size_t queue = 0;
    std::uint64_t frame_id = 0;
    SimTime txop_start;
    bool awaiting_ack = false;
  };

  StationSpec spec;
  std::unique_ptr<StationMac> mac;  // null for the wired sink
  std::unique_ptr<WiredLink> uplink;  // base stations only
  AssociationState assoc;
  std::optional<Exchange> exchange;
  std::optional<SimTime> access_at;
  std::uint64_t access_epoch = 0;
  std::uint64_t ack_epoch = 0;
  std::uint64_t crossing_epoch = 0;
  std::uint64_t handshake_epoch = 0;
  std::uint64_t pending_request = 0;

  NodeId id() const { return spec.id; }
  bool is_qsta() const { return spec.role == StationRole::Qsta; }
  bool is_bs() const { return spec.role == StationRole::BaseStation; }
};

Simulation::Simulation(const Scenario& scenario, std::uint64_t seed)
    : scenario_(scenario),
      seed_(seed),
      end_(scenario.duration()),
      rng_(seed),
      channel_([this](NodeId id, SimTime t) { return position(id, t); }),
      metrics_(scenario.warmup(), scenario.duration(), SimTime::seconds(scenario.bin_width_s)) {
  scenario_.validate();
  for (const auto& spec : scenario_.stations) {
    auto n = std::make_unique<Node>();
    n->spec = spec;
    if (spec.role == StationRole::WiredSink) {
      sink_id_ = spec.id;
    } else {
      const double range = spec.range_m.value_or(scenario_.radio.range_m);
      n->mac = std::make_unique<StationMac>(spec.id, scenario_.mac_mode, scenario_.radio,
                                            scenario_.edca, scenario_.dcf);
      channel_.add_node(spec.id, range);
      if (spec.role == StationRole::BaseStation) {
        n->uplink = std::make_unique<WiredLink>(scenario_.wired);
        base_stations_.push_back({spec.id, spec.position, range});
      }
    }
    node_index_[spec.id] = nodes_.size();
    nodes_.push_back(std::move(n));
  }
  for (const auto& flow : scenario_.flows) {
    sources_.emplace_back(flow, scenario_.effective_interval_us(flow));
    metrics_.add_flow(flow.flow_id);
  }
}

Simulation::~Simulation() = default;

Simulation::Node& Simulation::node(NodeId id) {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) throw std::logic_error("unknown node " + std::to_string(id));
  return *nodes_[it->second];
}

const Simulation::Node& Simulation::node(NodeId id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) throw std::logic_error("unknown node " + std::to_string(id));
  return *nodes_[it->second];
}

const StationMac& Simulation::mac(NodeId id) const {
  const Node& n = node(id);
  if (!n.mac) throw std::logic_error("node " + std::to_string(id) + " has no MAC");
  return *n.mac;
}

const AssociationState& Simulation::association(NodeId id) const { return node(id).assoc; }

Position Simulation::position(NodeId id, SimTime t) const {
  const Node& n = node(id);
  return n.spec.path ? position_at(*n.spec.path, t) : n.spec.position;
}

void Simulation::run() {
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    if (auto t = sources_[i].next_arrival(); t && *t < end_) {
      queue_.schedule(*t, EventKind::PacketArrival, static_cast<NodeId>(i));
    }
  }
  for (auto& n : nodes_) {
    if (!n->is_qsta()) continue;
    queue_.schedule(SimTime(), EventKind::MobilityTick, n->id());
    if (n->spec.path) schedule_next_crossing(*n);
  }
  while (auto ev = queue_.advance()) {
    if (ev->fire_at >= end_) break;
    ++events_dispatched_;
    dispatch(*ev);
  }
  audit();
}

void Simulation::dispatch(const EventRecord& ev) {
  switch (ev.kind) {
    case EventKind::PacketArrival: on_packet_arrival(ev.target); break;
    case EventKind::TimerExpiry: on_access(node(ev.target), ev.token); break;
    case EventKind::TxStart: on_tx_start(ev.token); break;
    case EventKind::TxEnd: on_tx_end(ev.token); break;
    case EventKind::AckTimeout: on_ack_timeout(node(ev.target), ev.token); break;
    case EventKind::WiredDelivery: on_wired_delivery(ev.target, ev.token); break;
    case EventKind::MobilityTick: on_mobility_tick(node(ev.target)); break;
    case EventKind::RangeCrossing: on_range_crossing(node(ev.target), ev.token); break;
    case EventKind::HandshakeStep: on_handshake_step(node(ev.target), ev.token); break;
  }
}

// --- traffic -----------------------------------------------------------------

void Simulation::on_packet_arrival(std::size_t flow_index) {
  TrafficSource& src = sources_[flow_index];
  const SimTime now = queue_.now();
  Frame frame = src.emit(now, next_frame_id_++, rng_);
  if (auto t = src.next_arrival(); t && *t < end_) {
    queue_.schedule(*t, EventKind::PacketArrival, static_cast<NodeId>(flow_index));
  }

  Node& n = node(frame.src);
  ledger_[frame.id] = {frame.flow_id, n.id(), LedgerState::InMac, frame.created_at};
  emit(FrameEventKind::Generated, n.id(), frame);
  if (!n.assoc.associated()) {
    drop(n.id(), frame, DropReason::Unassociated);
    return;
  }
  frame.dst = *n.assoc.current_bs;
  const Frame copy = frame;
  if (n.mac->enqueue(std::move(frame), now, rng_) == StationMac::EnqueueResult::DroppedQueueFull) {
    drop(n.id(), copy, DropReason::Queue);
    return;
  }
  emit(FrameEventKind::Enqueued, n.id(), copy);
  reschedule_access(n);
}

// --- channel access ----------------------------------------------------------

void Simulation::reschedule_access(Node& n) {
  const auto t = n.mac->next_access();
  if (t == n.access_at) return;
  ++n.access_epoch;
  n.access_at = t;
  if (t) queue_.schedule(*t, EventKind::TimerExpiry, n.id(), n.access_epoch);
}

void Simulation::on_access(Node& n, std::uint64_t token) {
  if (token != n.access_epoch) return;
  n.access_at.reset();
  auto grant = n.mac->grant(queue_.now(), rng_);
  for (const auto& f : grant.dropped) drop(n.id(), f, DropReason::Retry);
  if (grant.winner) start_exchange(n, *grant.winner);
  reschedule_access(n);
}

void Simulation::start_exchange(Node& n, std::size_t queue_index) {
  const SimTime now = queue_.now();
  n.exchange = Node::Exchange{queue_index, n.mac->queue(queue_index).head().id, now, false};
  n.mac->medium_busy(now);  // held until the exchange (or burst) ends
  transmit_head(n);
}

void Simulation::transmit_head(Node& n) {
  const SimTime now = queue_.now();
  auto& ex = *n.exchange;
  EdcaQueue& q = n.mac->queue(ex.queue);
  if (q.empty()) {
    end_exchange(n, true);
    return;
  }
  if (q.head().is_data() && n.is_qsta() && !n.assoc.associated()) {
    drop(n.id(), q.pop_head(), DropReason::Unassociated);
    end_exchange(n, true);
    return;
  }
  q.begin_transmit();
  Frame& f = q.head();
  if (!f.first_tx_at) f.first_tx_at = now;
  ex.frame_id = f.id;
  ex.awaiting_ack = false;

  const SimTime airtime = frame_airtime(f.payload_bytes, scenario_.radio);
  const Transmission& tx = channel_.begin(n.id(), f.id, now, airtime);
  const std::uint64_t tx_id = tx.id;
  TxInfo info;
  info.transmitter = n.id();
  info.frame = f;
  info.listeners = channel_.listeners(tx);
  for (NodeId l : info.listeners) node(l).mac->medium_busy(now);
  emit(FrameEventKind::TxStart, n.id(), f);
  queue_.schedule(now + airtime, EventKind::TxEnd, n.id(), tx_id);
  const auto listeners = info.listeners;
  tx_info_.emplace(tx_id, std::move(info));
  for (NodeId l : listeners) reschedule_access(node(l));
}

void Simulation::send_ack(NodeId from, NodeId to, std::uint64_t for_frame) {
  const SimTime now = queue_.now();
  const SimTime airtime = ack_airtime(scenario_.radio);
  const Transmission& tx = channel_.begin(from, for_frame, now, airtime);
  const std::uint64_t tx_id = tx.id;
  TxInfo info;
  info.transmitter = from;
  info.is_ack = true;
  info.ack_to = to;
  info.ack_for = for_frame;
  info.listeners = channel_.listeners(tx);
  for (NodeId l : info.listeners) node(l).mac->medium_busy(now);
  queue_.schedule(now + airtime, EventKind::TxEnd, from, tx_id);
  const auto listeners = info.listeners;
  tx_info_.emplace(tx_id, std::move(info));
  for (NodeId l : listeners) reschedule_access(node(l));
}

void Simulation::on_tx_start(std::uint64_t token) {
  auto handle = pending_starts_.extract(token);
  if (handle.empty()) throw std::logic_error("unknown pending transmission");
  const PendingStart p = handle.mapped();
  if (p.kind == PendingStart::Kind::Ack) {
    send_ack(p.node, p.ack_to, p.ack_for);
    return;
  }
  Node& n = node(p.node);
  if (n.exchange) transmit_head(n);
}

void Simulation::on_tx_end(std::uint64_t tx_id) {
  auto handle = tx_info_.extract(tx_id);
  if (handle.empty()) throw std::logic_error("unknown transmission " + std::to_string(tx_id));
  TxInfo info = std::move(handle.mapped());
  const SimTime now = queue_.now();
  channel_.end(tx_id);
  for (NodeId l : info.listeners) node(l).mac->medium_idle(now);

  if (info.is_ack) {
    Node& sender = node(info.ack_to);
    if (sender.exchange && sender.exchange->awaiting_ack &&
        sender.exchange->frame_id == info.ack_for &&
        channel_.resolve_reception(sender.id(), tx_id) == Reception::Success) {
      ++sender.ack_epoch;  // cancels the pending timeout
      exchange_succeeded(sender);
    }
  } else {
    Node& sender = node(info.transmitter);
    const Frame& frame = info.frame;
    emit(FrameEventKind::TxEnd, sender.id(), frame);
    if (sender.exchange && sender.exchange->frame_id == frame.id) {
      sender.exchange->awaiting_ack = true;
      sender.mac->queue(sender.exchange->queue).await_ack();
      ++sender.ack_epoch;
      const RadioParams& r = scenario_.radio;
      queue_.schedule(now + r.sifs() + ack_airtime(r) + r.slot(), EventKind::AckTimeout,
                      sender.id(), sender.ack_epoch);
    }
    auto rx_it = node_index_.find(frame.dst);
    if (rx_it != node_index_.end()) {
      Node& rx = *nodes_[rx_it->second];
      if (rx.mac && channel_.resolve_reception(rx.id(), tx_id) == Reception::Success &&
          accepts(rx, frame)) {
        const std::uint64_t token = next_start_token_++;
        pending_starts_[token] = {PendingStart::Kind::Ack, rx.id(), sender.id(), frame.id};
        queue_.schedule(now + scenario_.radio.sifs(), EventKind::TxStart, rx.id(), token);
        receive(rx, frame);
      }
    }
  }

  for (NodeId l : info.listeners) reschedule_access(node(l));
  channel_.prune(now);
}

void Simulation::exchange_succeeded(Node& n) {
  const SimTime now = queue_.now();
  auto& ex = *n.exchange;
  EdcaQueue& q = n.mac->queue(ex.queue);
  const Frame done = q.on_tx_success(now);
  ex.awaiting_ack = false;
  emit(FrameEventKind::MacAcked, n.id(), done);

  const bool head_sendable =
      !q.empty() && (!q.head().is_data() || !n.is_qsta() || n.assoc.associated());
  if (head_sendable && q.txop_burst_may_continue(now - ex.txop_start, scenario_.radio)) {
    const std::uint64_t token = next_start_token_++;
    pending_starts_[token] = {PendingStart::Kind::BurstNext, n.id(), 0, 0};
    queue_.schedule(now + scenario_.radio.sifs(), EventKind::TxStart, n.id(), token);
    return;
  }
  end_exchange(n, true);
}

void Simulation::end_exchange(Node& n, bool redraw_backoff) {
  const SimTime now = queue_.now();
  const std::size_t qi = n.exchange->queue;
  n.exchange.reset();
  EdcaQueue& q = n.mac->queue(qi);
  if (redraw_backoff) q.draw_backoff(rng_);
  n.mac->restart_contention(qi, now);
  n.mac->medium_idle(now);
  reschedule_access(n);
}

void Simulation::on_ack_timeout(Node& n, std::uint64_t token) {
  if (token != n.ack_epoch || !n.exchange || !n.exchange->awaiting_ack) return;
  EdcaQueue& q = n.mac->queue(n.exchange->queue);
  const bool head_is_data = q.head().is_data();
  auto outcome = q.on_tx_failure(rng_);
  if (outcome.dropped) {
    drop(n.id(), *outcome.dropped, DropReason::Retry);
  } else if (head_is_data && n.is_qsta() && !n.assoc.associated()) {
    drop(n.id(), q.pop_head(), DropReason::Unassociated);
  }
  end_exchange(n, false);
}

// --- reception and forwarding --------------------------------------------------

bool Simulation::accepts(const Node& rx, const Frame& frame) const {
  switch (frame.type) {
    case FrameType::Data: {
      if (!rx.is_bs()) return false;
      const Node& src = node(frame.src);
      return src.assoc.associated() && *src.assoc.current_bs == rx.id();
    }
    case FrameType::AssocRequest: return rx.is_bs();
    case FrameType::AssocResponse: return rx.is_qsta();
  }
  return false;
}

void Simulation::receive(Node& rx, const Frame& frame) {
  const SimTime now = queue_.now();
  switch (frame.type) {
    case FrameType::Data: {
      auto it = ledger_.find(frame.id);
      if (it == ledger_.end() || it->second.state != LedgerState::InMac) return;  // duplicate
      const auto delivery = rx.uplink->enqueue(now, frame.payload_bytes);
      if (!delivery) {
        drop(rx.id(), frame, DropReason::Wired);
        return;
      }
      it->second.state = LedgerState::InWired;
      wired_transit_[frame.id] = frame;
      queue_.schedule(*delivery, EventKind::WiredDelivery, rx.id(), frame.id);
      emit(FrameEventKind::Forwarded, rx.id(), frame);
      return;
    }
    case FrameType::AssocRequest: {
      Frame resp;
      resp.id = next_frame_id_++;
      resp.priority = 7;
      resp.src = rx.id();
      resp.dst = frame.src;
      resp.payload_bytes = kManagementFrameBytes;
      resp.type = FrameType::AssocResponse;
      resp.created_at = now;
      resp.in_reply_to = frame.id;
      const Frame copy = resp;
      if (rx.mac->enqueue(std::move(resp), now, rng_) == StationMac::EnqueueResult::Accepted) {
        emit(FrameEventKind::Enqueued, rx.id(), copy);
      }
      reschedule_access(rx);
      return;
    }
    case FrameType::AssocResponse: {
      if (rx.assoc.handshake == HandshakeState::RequestSent && rx.assoc.current_bs == frame.src &&
          frame.in_reply_to == rx.pending_request) {
        rx.assoc.handshake = HandshakeState::Complete;
        ++rx.handshake_epoch;
        log_roaming(rx.id(), RoamingEvent::Kind::Associated, frame.src);
      }
      return;
    }
  }
}

void Simulation::on_wired_delivery(NodeId bs, std::uint64_t frame_id) {
  auto handle = wired_transit_.extract(frame_id);
  if (handle.empty()) throw AuditError("wired delivery of unknown frame " + std::to_string(frame_id));
  const Frame frame = std::move(handle.mapped());
  auto it = ledger_.find(frame_id);
  if (it == ledger_.end() || it->second.state != LedgerState::InWired) {
    throw AuditError("frame " + std::to_string(frame_id) + " delivered twice via BS " +
                     std::to_string(bs));
  }
  ledger_.erase(it);
  emit(FrameEventKind::Delivered, sink_id_, frame);
}

// --- mobility and roaming ----------------------------------------------------

void Simulation::on_mobility_tick(Node& n) {
  evaluate_association(n);
  const SimTime next = queue_.now() + SimTime(scenario_.mobility_tick_us);
  if (next < end_) queue_.schedule(next, EventKind::MobilityTick, n.id());
}

void Simulation::on_range_crossing(Node& n, std::uint64_t token) {
  if (token != n.crossing_epoch) return;
  evaluate_association(n);
  schedule_next_crossing(n);
}

void Simulation::on_handshake_step(Node& n, std::uint64_t token) {
  if (token != n.handshake_epoch) return;
  evaluate_association(n);
}

void Simulation::schedule_next_crossing(Node& n) {
  std::optional<SimTime> next;
  for (const auto& bs : base_stations_) {
    const auto t = next_range_crossing(*n.spec.path, queue_.now(), bs.position, bs.range_m);
    if (t && (!next || *t < *next)) next = t;
  }
  ++n.crossing_epoch;
  if (next && *next < end_) {
    queue_.schedule(*next, EventKind::RangeCrossing, n.id(), n.crossing_epoch);
  }
}

void Simulation::evaluate_association(Node& n) {
  using Action = AssociationDecision::Action;
  const SimTime now = queue_.now();
  // A disassociation may be followed at once by a request to another BS.
  for (int round = 0; round < 2; ++round) {
    const auto decision = association_step(n.assoc, position(n.id(), now), base_stations_, now,
                                           SimTime(scenario_.handshake_timeout_us));
    switch (decision.action) {
      case Action::None: return;
      case Action::Disassociate:
      case Action::AbortHandshake: {
        log_roaming(n.id(),
                    decision.action == Action::Disassociate ? RoamingEvent::Kind::Disassociated
                                                            : RoamingEvent::Kind::HandshakeAborted,
                    *decision.bs);
        n.assoc = AssociationState{};
        ++n.handshake_epoch;
        flush_for_disassociation(n);
        break;
      }
      case Action::SendRequest: {
        n.assoc.current_bs = decision.bs;
        n.assoc.handshake = HandshakeState::RequestSent;
        n.assoc.handshake_started_at = now;
        log_roaming(n.id(), RoamingEvent::Kind::RequestSent, *decision.bs);
        Frame req;
        req.id = next_frame_id_++;
        req.priority = 7;
        req.src = n.id();
        req.dst = *decision.bs;
        req.payload_bytes = kManagementFrameBytes;
        req.type = FrameType::AssocRequest;
        req.created_at = now;
        n.pending_request = req.id;
        const Frame copy = req;
        if (n.mac->enqueue(std::move(req), now, rng_) == StationMac::EnqueueResult::Accepted) {
          emit(FrameEventKind::Enqueued, n.id(), copy);
        }
        reschedule_access(n);
        ++n.handshake_epoch;
        const SimTime deadline = now + SimTime(scenario_.handshake_timeout_us);
        if (deadline < end_) {
          queue_.schedule(deadline, EventKind::HandshakeStep, n.id(), n.handshake_epoch);
        }
        return;
      }
    }
  }
}

void Simulation::flush_for_disassociation(Node& n) {
  for (std::size_t i = 0; i < n.mac->queue_count(); ++i) {
    const bool keep_head = n.exchange && n.exchange->queue == i;
    for (const auto& f : n.mac->queue(i).flush(keep_head)) {
      drop(n.id(), f, DropReason::Unassociated);
    }
  }
}

void Simulation::log_roaming(NodeId station, RoamingEvent::Kind kind, NodeId bs) {
  roaming_.push_back({queue_.now(), station, kind, bs});
}

// --- accounting ------------------------------------------------------------

void Simulation::emit(FrameEventKind kind, NodeId station, const Frame& frame,
                      std::optional<DropReason> reason) {
  FrameEvent ev{queue_.now(), station, kind, frame.id, frame.flow_id, reason, frame.payload_bytes};
  metrics_.record(ev);
  if (observer_) observer_(ev);
}

void Simulation::drop(NodeId station, const Frame& frame, DropReason reason) {
  if (!frame.is_data()) return;
  auto it = ledger_.find(frame.id);
  // A copy whose original already reached the BS (lost ACK) is not a loss.
  if (it == ledger_.end() || it->second.state != LedgerState::InMac) return;
  ledger_.erase(it);
  emit(FrameEventKind::Dropped, station, frame, reason);
}

void Simulation::audit() const {
  const SimTime warmup = scenario_.warmup();
  std::map<std::int32_t, std::uint64_t> unresolved;
  std::unordered_set<std::uint64_t> queued;
  for (const auto& n : nodes_) {
    if (!n->mac) continue;
    for (std::size_t i = 0; i < n->mac->queue_count(); ++i) {
      for (const auto& f : n->mac->queue(i).frames()) {
        queued.insert(f.id);
        if (f.enqueued_at && *f.enqueued_at < f.created_at) {
          throw AuditError("frame " + std::to_string(f.id) + " enqueued before creation");
        }
        if (f.first_tx_at && f.enqueued_at && *f.first_tx_at < *f.enqueued_at) {
          throw AuditError("frame " + std::to_string(f.id) + " sent before being queued");
        }
      }
    }
  }
  for (const auto& [id, entry] : ledger_) {
    if (entry.state == LedgerState::InMac && !queued.contains(id)) {
      throw AuditError("frame " + std::to_string(id) + " is unresolved but not queued anywhere");
    }
    if (entry.state == LedgerState::InWired && !wired_transit_.contains(id)) {
      throw AuditError("frame " + std::to_string(id) + " is unresolved but not on the wire");
    }
    if (entry.created_at >= warmup) ++unresolved[entry.flow_id];
  }
  for (const auto& [flow_id, c] : metrics_.flows()) {
    const std::uint64_t in_flight = metrics_.in_flight(flow_id);
    if (c.generated != c.delivered + c.dropped_total() + in_flight) {
      throw AuditError("conservation violated for flow " + std::to_string(flow_id));
    }
    const auto it = unresolved.find(flow_id);
    const std::uint64_t ledger_count = it == unresolved.end() ? 0 : it->second;
    if (ledger_count != in_flight) {
      throw AuditError("ledger and metrics disagree on in-flight frames of flow " +
                       std::to_string(flow_id));
    }
  }
}

}  // namespace edcasim
