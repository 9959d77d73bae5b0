#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace edcasim {

/// Simulation clock value in integer microseconds. Used both for instants
/// (time since simulation start) and for durations.
class SimTime {
public:
  constexpr SimTime() = default;
  constexpr explicit SimTime(std::uint64_t micros) : micros_(micros) {}

  static constexpr SimTime micros(std::uint64_t us) { return SimTime(us); }
  static constexpr SimTime millis(std::uint64_t ms) { return SimTime(ms * 1000); }
  static SimTime seconds(double s);

  constexpr std::uint64_t us() const { return micros_; }
  constexpr double seconds() const { return static_cast<double>(micros_) * 1e-6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime d) const { return SimTime(micros_ + d.micros_); }
  constexpr SimTime& operator+=(SimTime d) {
    micros_ += d.micros_;
    return *this;
  }
  // Throws on underflow: durations are never negative.
  SimTime operator-(SimTime d) const;
  constexpr SimTime operator*(std::uint64_t k) const { return SimTime(micros_ * k); }

private:
  std::uint64_t micros_ = 0;
};

using NodeId = std::uint32_t;

enum class EventKind : std::uint8_t {
  TimerExpiry,    // channel access grant
  TxStart,
  TxEnd,
  AckTimeout,
  PacketArrival,
  MobilityTick,
  HandshakeStep,  // handshake supervision timeout
  RangeCrossing,
  WiredDelivery,
};

std::string_view to_string(EventKind kind);

struct EventRecord {
  SimTime fire_at;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::TimerExpiry;
  NodeId target = 0;
  // Opaque payload; targets use it to recognise stale (superseded) events.
  std::uint64_t token = 0;
};

/// Ordered event queue with a monotone clock. Ties on fire time are broken by
/// insertion order.
class EventQueue {
public:
  /// Assigns the sequence number and stores the event. Scheduling before the
  /// current clock throws std::logic_error.
  std::uint64_t schedule(SimTime at, EventKind kind, NodeId target, std::uint64_t token = 0);

  /// Pops the earliest event and moves the clock to it; nullopt when empty.
  std::optional<EventRecord> advance();

  SimTime now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

private:
  struct Later {
    bool operator()(const EventRecord& a, const EventRecord& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<EventRecord, std::vector<EventRecord>, Later> heap_;
  SimTime now_;
  std::uint64_t next_seq_ = 0;
};

/// The single seeded random source of a run. All stochastic draws go through
/// it in event-dispatch order.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform integer in [lo, hi]. lo > hi throws std::logic_error.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Normal(mean, std) draw resampled until it falls in [lo, hi].
  double normal_truncated(double mean, double std, double lo, double hi);

  double uniform01();

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace edcasim
