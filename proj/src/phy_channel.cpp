#include "edcasim/phy_channel.hpp"

#include <stdexcept>
#include <string>

namespace edcasim {

namespace {

// Long enough for the largest frame at the lowest supported rate to end.
constexpr std::uint64_t kHistoryHorizonUs = 100'000;

std::uint64_t ceil_div(std::uint64_t num, std::uint64_t den) { return (num + den - 1) / den; }

}  // namespace

void RadioParams::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw std::invalid_argument(std::string("radio.") + field + " is invalid");
  };
  require(data_rate_bps > 0, "data_rate_bps");
  require(slot_us > 0, "slot_us");
  require(sifs_us > 0, "sifs_us");
  require(difs_us == sifs_us + 2 * slot_us, "difs_us (must equal sifs_us + 2 * slot_us)");
  require(preamble_us > 0, "preamble_us");
  require(mac_overhead_bytes > 0, "mac_overhead_bytes");
  require(ack_bytes > 0, "ack_bytes");
  require(range_m > 0.0 && std::isfinite(range_m), "range_m");
  require(propagation_delay_us == 0, "propagation_delay_us (only 0 is supported)");
}

SimTime frame_airtime(std::uint32_t payload_bytes, const RadioParams& radio) {
  if (payload_bytes < 1 || payload_bytes > kMaxMsduBytes) {
    throw std::invalid_argument("frame_airtime: payload " + std::to_string(payload_bytes) +
                                " outside [1, 2304] bytes");
  }
  const std::uint64_t bits = 8ULL * (payload_bytes + radio.mac_overhead_bytes);
  return SimTime(radio.preamble_us + ceil_div(bits * 1'000'000ULL, radio.data_rate_bps));
}

SimTime ack_airtime(const RadioParams& radio) {
  const std::uint64_t bits = 8ULL * radio.ack_bytes;
  return SimTime(radio.preamble_us + ceil_div(bits * 1'000'000ULL, radio.data_rate_bps));
}

void Channel::add_node(NodeId id, double range_m) { ranges_[id] = range_m; }

double Channel::range_of(NodeId id) const {
  auto it = ranges_.find(id);
  if (it == ranges_.end()) throw std::logic_error("channel: unknown node " + std::to_string(id));
  return it->second;
}

const Transmission& Channel::begin(NodeId transmitter, std::uint64_t frame_id, SimTime start,
                                   SimTime duration) {
  if (duration.us() == 0) throw std::logic_error("channel: zero-length transmission");
  Transmission tx;
  tx.id = next_id_++;
  tx.frame_id = frame_id;
  tx.transmitter = transmitter;
  tx.start = start;
  tx.end = start + duration;
  tx.origin = position_of_(transmitter, start);
  tx.range_m = range_of(transmitter);
  history_.push_back(tx);
  return history_.back();
}

std::size_t Channel::index_of(std::uint64_t tx_id) const {
  if (history_.empty() || tx_id < history_.front().id || tx_id > history_.back().id) {
    throw std::logic_error("channel: transmission " + std::to_string(tx_id) + " not in history");
  }
  return tx_id - history_.front().id;
}

const Transmission& Channel::get(std::uint64_t tx_id) const { return history_[index_of(tx_id)]; }

void Channel::end(std::uint64_t tx_id) { history_[index_of(tx_id)].active = false; }

bool Channel::detects(const Transmission& tx, Position listener) const {
  return in_range(tx.origin, listener, tx.range_m);
}

std::vector<NodeId> Channel::listeners(const Transmission& tx) const {
  std::vector<NodeId> out;
  for (const auto& [id, range] : ranges_) {
    if (id == tx.transmitter || detects(tx, position_of_(id, tx.start))) out.push_back(id);
  }
  return out;
}

bool Channel::carrier_sensed(NodeId listener, SimTime at) const {
  const Position where = position_of_(listener, at);
  for (const auto& tx : history_) {
    if (tx.start <= at && at < tx.end && (tx.transmitter == listener || detects(tx, where))) {
      return true;
    }
  }
  return false;
}

Reception Channel::resolve_reception(NodeId receiver, std::uint64_t tx_id) const {
  const Transmission& tx = get(tx_id);
  const Position at_start = position_of_(receiver, tx.start);
  const Position at_end = position_of_(receiver, tx.end);
  if (!detects(tx, at_start) || !in_range(tx.origin, at_end, tx.range_m)) {
    return Reception::OutOfRange;
  }
  for (const auto& other : history_) {
    if (other.id == tx.id) continue;
    if (other.start >= tx.end) break;
    if (other.end <= tx.start) continue;
    // The receiver's own transmissions count: the radio is half duplex.
    if (other.transmitter == receiver || detects(other, at_start)) return Reception::Collision;
  }
  return Reception::Success;
}

void Channel::prune(SimTime now) {
  while (!history_.empty() && !history_.front().active &&
         history_.front().end.us() + kHistoryHorizonUs < now.us()) {
    history_.pop_front();
  }
}

void WiredLinkParams::validate() const {
  if (rate_bps == 0) throw std::invalid_argument("wired.rate_bps must be positive");
  if (queue_capacity == 0) throw std::invalid_argument("wired.queue_capacity must be positive");
}

SimTime WiredLink::serialization(std::uint32_t bytes) const {
  return SimTime(ceil_div(8ULL * bytes * 1'000'000ULL, params_.rate_bps));
}

std::size_t WiredLink::backlog(SimTime now) {
  while (!departures_.empty() && departures_.front() <= now) departures_.pop_front();
  return departures_.size();
}

std::optional<SimTime> WiredLink::enqueue(SimTime now, std::uint32_t bytes) {
  if (backlog(now) >= params_.queue_capacity) return std::nullopt;
  const SimTime start = departures_.empty() ? now : std::max(now, departures_.back());
  const SimTime done = start + serialization(bytes);
  departures_.push_back(done);
  return done + SimTime(params_.delay_us);
}

}  // namespace edcasim
