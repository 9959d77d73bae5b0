#include "edcasim/sim_core.hpp"

#include <cmath>
#include <string>

namespace edcasim {

SimTime SimTime::seconds(double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("SimTime::seconds: negative or non-finite value");
  }
  return SimTime(static_cast<std::uint64_t>(std::llround(s * 1e6)));
}

SimTime SimTime::operator-(SimTime d) const {
  if (d.micros_ > micros_) {
    throw std::logic_error("SimTime subtraction underflow: " + std::to_string(micros_) + " - " +
                           std::to_string(d.micros_));
  }
  return SimTime(micros_ - d.micros_);
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::TimerExpiry: return "timer-expiry";
    case EventKind::TxStart: return "tx-start";
    case EventKind::TxEnd: return "tx-end";
    case EventKind::AckTimeout: return "ack-timeout";
    case EventKind::PacketArrival: return "packet-arrival";
    case EventKind::MobilityTick: return "mobility-tick";
    case EventKind::HandshakeStep: return "handshake-step";
    case EventKind::RangeCrossing: return "range-crossing";
    case EventKind::WiredDelivery: return "wired-delivery";
  }
  return "unknown";
}

std::uint64_t EventQueue::schedule(SimTime at, EventKind kind, NodeId target, std::uint64_t token) {
  if (at < now_) {
    throw std::logic_error("schedule in the past: " + std::string(to_string(kind)) + " for node " +
                           std::to_string(target) + " at " + std::to_string(at.us()) +
                           " us, clock is " + std::to_string(now_.us()) + " us");
  }
  EventRecord ev{at, next_seq_++, kind, target, token};
  heap_.push(ev);
  return ev.seq;
}

std::optional<EventRecord> EventQueue::advance() {
  if (heap_.empty()) return std::nullopt;
  EventRecord ev = heap_.top();
  heap_.pop();
  now_ = ev.fire_at;
  return ev;
}

std::int64_t RandomStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) {
    throw std::logic_error("uniform_int: lo > hi (" + std::to_string(lo) + " > " +
                           std::to_string(hi) + ")");
  }
  std::uniform_int_distribution<std::int64_t> dist(lo, hi);
  return dist(engine_);
}

double RandomStream::normal_truncated(double mean, double std, double lo, double hi) {
  if (std < 0.0) throw std::invalid_argument("normal_truncated: negative standard deviation");
  if (!(lo < hi) || mean < lo || mean > hi) {
    throw std::invalid_argument("normal_truncated: require lo < hi and lo <= mean <= hi");
  }
  if (std == 0.0) return mean;
  std::normal_distribution<double> dist(mean, std);
  for (;;) {
    double x = dist(engine_);
    if (x >= lo && x <= hi) return x;
  }
}

double RandomStream::uniform01() {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

}  // namespace edcasim
