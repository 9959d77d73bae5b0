#include <doctest.h>

#include <cmath>

#include "edcasim/traffic.hpp"

using namespace edcasim;

namespace {

FlowSpec spec(double mean, double std, std::uint64_t interval_us) {
  FlowSpec f;
  f.flow_id = 1;
  f.priority = 7;
  f.src = 1;
  f.dst = 200;
  f.size_mean_bytes = mean;
  f.size_std_bytes = std;
  f.interval_us = interval_us;
  return f;
}

}  // namespace

TEST_CASE("offered rates") {
  CHECK(offered_rate_bps(spec(300, 40, 40'000)) == doctest::Approx(60'000));
  CHECK(offered_rate_bps(spec(800, 150, 50'000)) == doctest::Approx(128'000));
  CHECK(offered_rate_bps(spec(300, 40, 25'000)) == doctest::Approx(96'000));
}

TEST_CASE("flow validation") {
  CHECK_NOTHROW(spec(300, 40, 1).validate());
  CHECK_THROWS_AS(spec(300, 40, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(spec(0, 40, 10).validate(), std::invalid_argument);
  CHECK_THROWS_AS(spec(2305, 40, 10).validate(), std::invalid_argument);
  CHECK_THROWS_AS(spec(300, -1, 10).validate(), std::invalid_argument);
  auto f = spec(300, 0, 10);
  f.priority = 8;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}

TEST_CASE("zero variance gives exact sizes") {
  RandomStream rng(1);
  const auto f = spec(300, 0, 40'000);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const Frame fr = next_packet(f, SimTime(i), i, rng);
    CHECK(fr.payload_bytes == 300);
    CHECK(fr.created_at == SimTime(i));
    CHECK(fr.flow_id == 1);
    CHECK(fr.priority == 7);
    CHECK(fr.is_data());
  }
}

TEST_CASE("arrivals are strictly periodic from start_at") {
  auto f = spec(300, 40, 40'000);
  f.start_at = SimTime::millis(1);
  f.stop_at = SimTime::millis(122);
  TrafficSource src(f, f.interval_us);
  RandomStream rng(1);
  std::vector<std::uint64_t> times;
  while (auto t = src.next_arrival()) {
    times.push_back(t->us());
    src.emit(*t, times.size(), rng);
  }
  CHECK(times == std::vector<std::uint64_t>{1000, 41000, 81000, 121000});
}

TEST_CASE("size distribution matches the profile") {
  RandomStream rng(5);
  const auto f = spec(800, 150, 50'000);
  double sum = 0;
  for (int i = 0; i < 10'000; ++i) {
    const auto b = next_packet(f, SimTime(), 1, rng).payload_bytes;
    REQUIRE(b >= 1);
    REQUIRE(b <= 2304);
    sum += b;
  }
  CHECK(std::abs(sum / 10'000 - 800) <= 5);
}

TEST_CASE("property: generated count and empirical rate") {
  RandomStream rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto interval = static_cast<std::uint64_t>(rng.uniform_int(1000, 60'000));
    auto f = spec(300, 40, interval);
    const SimTime window = SimTime::seconds(100);
    TrafficSource src(f, interval);
    std::uint64_t n = 0;
    double bytes = 0;
    while (auto t = src.next_arrival()) {
      if (*t >= window) break;
      bytes += src.emit(*t, n++, rng).payload_bytes;
    }
    const auto expected = window.us() / interval;
    CHECK(n + 1 >= expected);
    CHECK(n <= expected + 1);
    CHECK(std::abs(8 * bytes / 100.0 - offered_rate_bps(f)) / offered_rate_bps(f) < 0.02);
  }
}
