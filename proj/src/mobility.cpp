#include "edcasim/mobility.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace edcasim {

namespace {

struct TimedSegment {
  double t0;  // seconds
  double t1;
  Position a;
  Position b;
};

std::vector<double> cumulative_lengths(const WaypointPath& path) {
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    cum.push_back(cum.back() + distance(path.waypoints[i - 1], path.waypoints[i]));
  }
  return cum;
}

Position point_at_distance(const WaypointPath& path, const std::vector<double>& cum, double d) {
  const auto& wp = path.waypoints;
  for (std::size_t i = 1; i < wp.size(); ++i) {
    if (d <= cum[i]) {
      const double seg = cum[i] - cum[i - 1];
      const double f = seg > 0.0 ? (d - cum[i - 1]) / seg : 0.0;
      return {wp[i - 1].x + f * (wp[i].x - wp[i - 1].x), wp[i - 1].y + f * (wp[i].y - wp[i - 1].y)};
    }
  }
  return wp.back();
}

// Segments of traversal leg `k`: even legs walk the polyline forward, odd legs
// (ping-pong only) walk it backward.
std::vector<TimedSegment> leg_segments(const WaypointPath& path, const std::vector<double>& cum,
                                       std::uint64_t k) {
  const double v = path.speed_mps;
  const double total = cum.back();
  const double leg_start = static_cast<double>(k) * total / v;
  const auto& wp = path.waypoints;
  std::vector<TimedSegment> out;
  if (k % 2 == 0) {
    for (std::size_t j = 0; j + 1 < wp.size(); ++j) {
      out.push_back({leg_start + cum[j] / v, leg_start + cum[j + 1] / v, wp[j], wp[j + 1]});
    }
  } else {
    for (std::size_t j = wp.size() - 1; j >= 1; --j) {
      out.push_back({leg_start + (total - cum[j]) / v, leg_start + (total - cum[j - 1]) / v, wp[j],
                     wp[j - 1]});
    }
  }
  return out;
}

}  // namespace

void WaypointPath::validate() const {
  if (waypoints.empty()) throw std::invalid_argument("path.waypoints must not be empty");
  if (!(speed_mps > 0.0) || !std::isfinite(speed_mps)) {
    throw std::invalid_argument("path.speed_mps must be positive");
  }
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    if (!std::isfinite(waypoints[i].x) || !std::isfinite(waypoints[i].y)) {
      throw std::invalid_argument("path.waypoints must be finite");
    }
    if (i > 0 && waypoints[i] == waypoints[i - 1]) {
      throw std::invalid_argument("path.waypoints: consecutive waypoints must differ");
    }
  }
}

double WaypointPath::length() const { return cumulative_lengths(*this).back(); }

Position position_at(const WaypointPath& path, SimTime t) {
  if (path.waypoints.size() == 1) return path.waypoints.front();
  const auto cum = cumulative_lengths(path);
  const double total = cum.back();
  double d = path.speed_mps * t.seconds();
  if (path.repeat) {
    d = std::fmod(d, 2.0 * total);
    if (d > total) d = 2.0 * total - d;
  } else {
    d = std::min(d, total);
  }
  return point_at_distance(path, cum, d);
}

std::optional<SimTime> next_range_crossing(const WaypointPath& path, SimTime after,
                                           Position center, double range_m) {
  if (path.waypoints.size() < 2) return std::nullopt;
  const auto cum = cumulative_lengths(path);
  const double leg_time = cum.back() / path.speed_mps;
  const double after_s = after.seconds();
  const auto first_leg = static_cast<std::uint64_t>(std::floor(after_s / leg_time));
  std::uint64_t last_leg = first_leg + 2;  // a full ping-pong period past `after`
  if (!path.repeat) {
    if (first_leg > 0) return std::nullopt;
    last_leg = 0;
  }
  for (std::uint64_t k = first_leg; k <= last_leg; ++k) {
    for (const auto& seg : leg_segments(path, cum, k)) {
      if (seg.t1 <= after_s) continue;
      const double dt = seg.t1 - seg.t0;
      const double vx = (seg.b.x - seg.a.x) / dt;
      const double vy = (seg.b.y - seg.a.y) / dt;
      const double wx = seg.a.x - center.x;
      const double wy = seg.a.y - center.y;
      const double qa = vx * vx + vy * vy;
      const double qb = 2.0 * (wx * vx + wy * vy);
      const double qc = wx * wx + wy * wy - range_m * range_m;
      const double disc = qb * qb - 4.0 * qa * qc;
      if (qa <= 0.0 || disc <= 0.0) continue;  // tangent contact is not a crossing
      const double sq = std::sqrt(disc);
      for (double s : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
        const double t = seg.t0 + s;
        if (s < 0.0 || s > dt || t <= after_s) continue;
        const auto us = static_cast<std::uint64_t>(std::floor(t * 1e6)) + 1;
        if (us > after.us()) return SimTime(us);
      }
    }
  }
  return std::nullopt;
}

std::string_view to_string(HandshakeState state) {
  switch (state) {
    case HandshakeState::None: return "none";
    case HandshakeState::RequestSent: return "request-sent";
    case HandshakeState::Complete: return "complete";
  }
  return "?";
}

AssociationDecision association_step(const AssociationState& state, Position station_pos,
                                     std::span<const BaseStationView> base_stations, SimTime now,
                                     SimTime handshake_timeout) {
  using Action = AssociationDecision::Action;
  auto find = [&](NodeId id) -> const BaseStationView* {
    for (const auto& bs : base_stations) {
      if (bs.id == id) return &bs;
    }
    return nullptr;
  };

  if (state.current_bs) {
    const BaseStationView* serving = find(*state.current_bs);
    const bool reachable =
        serving != nullptr && in_range(station_pos, serving->position, serving->range_m);
    if (state.handshake == HandshakeState::Complete) {
      if (!reachable) return {Action::Disassociate, state.current_bs};
      return {};
    }
    if (state.handshake == HandshakeState::RequestSent) {
      if (!reachable || now >= state.handshake_started_at + handshake_timeout) {
        return {Action::AbortHandshake, state.current_bs};
      }
      return {};
    }
  }

  const BaseStationView* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& bs : base_stations) {
    const double d = distance(station_pos, bs.position);
    if (d <= bs.range_m && d < best_d) {
      best = &bs;
      best_d = d;
    }
  }
  if (best == nullptr) return {};
  return {Action::SendRequest, best->id};
}

}  // namespace edcasim
