#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "edcasim/geometry.hpp"
#include "edcasim/sim_core.hpp"

namespace edcasim {

/// Constant-speed motion along a polyline. With `repeat` the node walks back
/// and forth (ping-pong); without it, it stops at the last waypoint.
struct WaypointPath {
  std::vector<Position> waypoints;
  double speed_mps = 1.0;
  bool repeat = false;

  /// Throws std::invalid_argument if there are no waypoints, consecutive
  /// waypoints coincide, or the speed is not positive.
  void validate() const;
  double length() const;

  bool operator==(const WaypointPath&) const = default;
};

Position position_at(const WaypointPath& path, SimTime t);

/// First instant strictly after `after` at which the node crosses the circle
/// of radius `range_m` around `center` (entering or leaving), or nullopt if
/// it never does. The returned time is the first whole microsecond on the far
/// side of the crossing.
std::optional<SimTime> next_range_crossing(const WaypointPath& path, SimTime after,
                                           Position center, double range_m);

enum class HandshakeState : std::uint8_t { None, RequestSent, Complete };

std::string_view to_string(HandshakeState state);

struct AssociationState {
  std::optional<NodeId> current_bs;
  HandshakeState handshake = HandshakeState::None;
  SimTime handshake_started_at;

  bool associated() const { return current_bs && handshake == HandshakeState::Complete; }
};

struct BaseStationView {
  NodeId id;
  Position position;
  double range_m;
};

struct AssociationDecision {
  enum class Action { None, Disassociate, AbortHandshake, SendRequest };
  Action action = Action::None;
  std::optional<NodeId> bs;  // the BS left (Disassociate/Abort) or targeted (SendRequest)
};

/// One evaluation of the roaming rules for a station at `station_pos`:
/// leaving the serving BS's disc disassociates; an unanswered request times
/// out after `handshake_timeout`; an unassociated station with a BS in range
/// requests association with the nearest one.
AssociationDecision association_step(const AssociationState& state, Position station_pos,
                                     std::span<const BaseStationView> base_stations, SimTime now,
                                     SimTime handshake_timeout);

}  // namespace edcasim
