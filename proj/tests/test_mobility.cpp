#include <doctest.h>

#include <cmath>
#include <vector>

#include "edcasim/mobility.hpp"

using namespace edcasim;

namespace {

WaypointPath line(double x0, double x1, double speed, bool repeat) {
  return {{{x0, 0.0}, {x1, 0.0}}, speed, repeat};
}

}  // namespace

TEST_CASE("in_range is a closed disc") {
  CHECK(in_range({0, 0}, {0, 0}, 150));
  CHECK(in_range({0, 0}, {150, 0}, 150));
  CHECK_FALSE(in_range({0, 0}, {150.001, 0}, 150));
  CHECK(in_range({0, 0}, {90, 120}, 150));
}

TEST_CASE("position along a path") {
  const auto p = line(0, 200, 20, false);
  CHECK(position_at(p, SimTime()) == Position{0, 0});
  CHECK(position_at(p, SimTime::seconds(5)) == Position{100, 0});
  CHECK(position_at(p, SimTime::seconds(50)) == Position{200, 0});  // stops at the end
}

TEST_CASE("ping-pong reflection") {
  const auto p = line(0, 200, 20, true);
  CHECK(position_at(p, SimTime::seconds(15)) == Position{100, 0});
  CHECK(position_at(p, SimTime::seconds(10)) == Position{200, 0});
  CHECK(position_at(p, SimTime::seconds(20)) == Position{0, 0});
  CHECK(position_at(p, SimTime::seconds(25)).x == doctest::Approx(100));
}

TEST_CASE("multi-segment path") {
  WaypointPath p{{{0, 0}, {30, 0}, {30, 40}}, 10, false};
  CHECK(p.length() == doctest::Approx(70));
  const auto at = position_at(p, SimTime::seconds(5));
  CHECK(at.x == doctest::Approx(30));
  CHECK(at.y == doctest::Approx(20));
}

TEST_CASE("path validation") {
  CHECK_THROWS_AS((WaypointPath{{}, 1, false}.validate()), std::invalid_argument);
  CHECK_THROWS_AS(line(0, 10, 0, false).validate(), std::invalid_argument);
  CHECK_THROWS_AS(line(5, 5, 1, false).validate(), std::invalid_argument);
  CHECK_NOTHROW(line(0, 10, 1, true).validate());
}

TEST_CASE("property: position is continuous") {
  RandomStream rng(8);
  WaypointPath p{{{-50, -15}, {450, -15}, {300, 80}}, 20, true};
  for (int i = 0; i < 5000; ++i) {
    const auto t = static_cast<std::uint64_t>(rng.uniform_int(0, 200'000'000));
    const auto dt = static_cast<std::uint64_t>(rng.uniform_int(0, 100'000));
    const double moved = distance(position_at(p, SimTime(t)), position_at(p, SimTime(t + dt)));
    REQUIRE(moved <= 20.0 * static_cast<double>(dt) * 1e-6 + 1e-9);
  }
}

TEST_CASE("range crossings of a straight ping-pong path") {
  const auto p = line(-50, 450, 20, true);
  // Leaves the 150 m disc around the origin at x = 150, t = 10 s.
  const auto leave = next_range_crossing(p, SimTime(), {0, 0}, 150);
  REQUIRE(leave);
  CHECK(leave->us() == 10'000'001);
  // Enters BS2's disc (center 400) at x = 250, t = 15 s.
  const auto enter = next_range_crossing(p, SimTime(), {400, 0}, 150);
  REQUIRE(enter);
  CHECK(enter->us() == 15'000'001);
  // On the way back: leaves BS2 at x = 250 (t = 35 s).
  const auto back = next_range_crossing(p, SimTime::seconds(20), {400, 0}, 150);
  REQUIRE(back);
  CHECK(back->us() == 35'000'001);
  CHECK_FALSE(next_range_crossing(p, SimTime(), {0, 1000}, 150));
}

TEST_CASE("property: crossing times agree with a fine scan") {
  RandomStream rng(13);
  WaypointPath p{{{-50, 7}, {450, -3}}, 20, true};
  const Position c{0, 0};
  for (int trial = 0; trial < 40; ++trial) {
    const SimTime after(static_cast<std::uint64_t>(rng.uniform_int(0, 60'000'000)));
    const auto t = next_range_crossing(p, after, c, 150);
    REQUIRE(t);
    // Just before the crossing the disc membership matches `after`; at it, it flips.
    const bool inside_before = in_range(position_at(p, *t - SimTime(2)), c, 150);
    const bool inside_at = in_range(position_at(p, *t), c, 150);
    CHECK(inside_before != inside_at);
    // No flip between `after` and the crossing (scan at 1 ms).
    const bool inside0 = in_range(position_at(p, after), c, 150);
    for (std::uint64_t s = after.us(); s + 1000 < t->us(); s += 1000) {
      REQUIRE(in_range(position_at(p, SimTime(s)), c, 150) == inside0);
    }
  }
}

TEST_CASE("association rules") {
  using Action = AssociationDecision::Action;
  const std::vector<BaseStationView> bss{{100, {0, 0}, 150}, {101, {400, 0}, 150}};
  const SimTime timeout = SimTime::seconds(1);

  AssociationState none;
  SUBCASE("no BS in range: stay unassociated") {
    CHECK(association_step(none, {200, 0}, bss, SimTime(), timeout).action == Action::None);
  }
  SUBCASE("nearest BS in range gets the request") {
    const auto d = association_step(none, {300, 0}, bss, SimTime(), timeout);
    CHECK(d.action == Action::SendRequest);
    CHECK(d.bs == 101u);
  }
  SUBCASE("leaving the serving BS disassociates") {
    AssociationState s{100, HandshakeState::Complete, SimTime()};
    CHECK(association_step(s, {100, 0}, bss, SimTime(), timeout).action == Action::None);
    const auto d = association_step(s, {151, 0}, bss, SimTime(), timeout);
    CHECK(d.action == Action::Disassociate);
    CHECK(d.bs == 100u);
  }
  SUBCASE("pending handshake times out") {
    AssociationState s{100, HandshakeState::RequestSent, SimTime::seconds(2)};
    CHECK(association_step(s, {10, 0}, bss, SimTime::seconds(2.5), timeout).action == Action::None);
    CHECK(association_step(s, {10, 0}, bss, SimTime::seconds(3), timeout).action ==
          Action::AbortHandshake);
    CHECK(association_step(s, {200, 0}, bss, SimTime::seconds(2.1), timeout).action ==
          Action::AbortHandshake);
  }
  CHECK_FALSE(none.associated());
  CHECK((AssociationState{100, HandshakeState::Complete, SimTime()}).associated());
  CHECK_FALSE((AssociationState{100, HandshakeState::RequestSent, SimTime()}).associated());
}
