#pragma once

#include <cmath>

namespace edcasim {

/// Planar position in meters.
struct Position {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Position&) const = default;
};

inline double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Closed detection disc: a point exactly on the boundary is in range.
inline bool in_range(Position a, Position b, double range_m) { return distance(a, b) <= range_m; }

}  // namespace edcasim
