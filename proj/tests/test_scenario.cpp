#include <doctest.h>

#include <string>

#include "edcasim/scenario.hpp"

using namespace edcasim;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"({
  "schema": 1,
  "duration_s": 10,
  "stations": [
    {"id": 100, "role": "BS", "position": [0, 0]},
    {"id": 200, "role": "wired-sink"},
    {"id": 1, "role": "QSTA", "position": [10, 0]}
  ],
  "flows": [
    {"flow_id": 1, "priority": 7, "src": 1, "dst": 200, "size_mean_bytes": 300, "interval_us": 25000}
  ]
})";

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("preset A") {
  const Scenario a = preset("A");
  CHECK_NOTHROW(a.validate());
  CHECK(a.mac_mode == MacMode::Edcf);
  CHECK(a.duration_s == 100);
  CHECK(a.warmup_s == 5);
  int bs = 0, qsta = 0, sink = 0;
  for (const auto& s : a.stations) {
    if (s.role == StationRole::BaseStation) {
      ++bs;
      CHECK(s.position == Position{0, 0});
    }
    if (s.role == StationRole::Qsta) {
      ++qsta;
      CHECK(distance(s.position, {0, 0}) == doctest::Approx(30));
      CHECK_FALSE(s.path);
    }
    if (s.role == StationRole::WiredSink) ++sink;
  }
  CHECK(bs == 1);
  CHECK(qsta == 4);
  CHECK(sink == 1);
  REQUIRE(a.flows.size() == 4);
  CHECK(a.flows[0].priority == 7);
  CHECK(a.flows[0].interval_us == 25'000);
  CHECK(a.flows[0].size_mean_bytes == 300);
  CHECK(a.flows[1].priority == 5);
  CHECK(a.flows[1].interval_us == 40'000);
  CHECK(classify(a.flows[2].priority) == AccessCategory::BE);
  CHECK(classify(a.flows[3].priority) == AccessCategory::BK);
  CHECK(a.flows[2].size_mean_bytes == 800);
  CHECK(a.flows[3].size_std_bytes == 150);
  for (const auto& f : a.flows) {
    CHECK(f.dst == 200);
    CHECK(f.start_at == SimTime::millis(static_cast<std::uint64_t>(f.flow_id)));
  }
}

TEST_CASE("presets B and C move every QSTA at 20 m/s") {
  for (const char* name : {"B", "C"}) {
    const Scenario s = preset(name);
    CHECK_NOTHROW(s.validate());
    for (const auto& st : s.stations) {
      if (st.role != StationRole::Qsta) continue;
      REQUIRE(st.path);
      CHECK(st.path->speed_mps == 20);
      CHECK(st.path->repeat);
    }
  }
  const Scenario c = preset("C");
  int bs = 0;
  for (const auto& st : c.stations) {
    if (st.role == StationRole::BaseStation) ++bs;
  }
  CHECK(bs == 2);
  CHECK(c.station(101)->position == Position{400, 0});
}

TEST_CASE("unknown preset lists the available ones") {
  try {
    load_scenario("Z");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(contains(e.what(), "A, B, C"));
  }
}

TEST_CASE("round trip through the canonical form") {
  for (const char* name : {"A", "B", "C"}) {
    Scenario s = preset(name);
    const std::string text = emit_scenario(s);
    const Scenario back = parse_scenario(text);
    CHECK(back == s);
    CHECK(emit_scenario(back) == text);
    CHECK(scenario_hash(back) == scenario_hash(s));
  }
  Scenario s = parse_scenario(kMinimal);
  s.load_multiplier = 2.5;
  s.ac(AccessCategory::BE).cw_min = 15;
  s.dcf.retry_limit = 3;
  s.flows[0].stop_at = SimTime::seconds(7);
  s.stations[2].range_m = 99.5;
  CHECK(parse_scenario(emit_scenario(s)) == s);
  CHECK(scenario_hash(s) != scenario_hash(preset("A")));
}

TEST_CASE("defaults are applied") {
  const Scenario s = parse_scenario(kMinimal);
  CHECK(s.warmup_s == 5);
  CHECK(s.mac_mode == MacMode::Edcf);
  CHECK(s.radio == RadioParams{});
  CHECK(s.wired == WiredLinkParams{});
  CHECK(s.ac(AccessCategory::VO) == default_edca_params(AccessCategory::VO));
  CHECK(s.flows[0].start_at == SimTime::millis(1));
  CHECK(s.flows[0].size_std_bytes == 0);
}

TEST_CASE("load multiplier divides intervals") {
  Scenario s = preset("A");
  s.load_multiplier = 2.5;
  CHECK(s.effective_interval_us(s.flows[0]) == 10'000);
  CHECK(s.effective_interval_us(s.flows[1]) == 16'000);
  CHECK(s.effective_interval_us(s.flows[2]) == 20'000);
}

TEST_CASE("schema errors name the offending key") {
  std::string text = kMinimal;
  CHECK(contains(error_of(R"({"duration_s": 1})"), "'schema'"));
  CHECK(contains(error_of(R"({"schema": 2})"), "'schema'"));
  CHECK(contains(error_of("{nope"), "not valid JSON"));

  auto with = [&](const std::string& from, const std::string& to) {
    std::string t = text;
    t.replace(t.find(from), from.size(), to);
    return error_of(t);
  };
  CHECK(contains(with("\"duration_s\": 10", "\"duration_s\": 10, \"durration\": 3"), "'durration'"));
  CHECK(contains(with("\"duration_s\": 10", "\"duration_s\": \"ten\""), "'duration_s'"));
  CHECK(contains(with("\"role\": \"BS\"", "\"role\": \"AP\""), "'stations[0].role'"));
  CHECK(contains(with("\"priority\": 7", "\"priority\": 9"), "flows[0]"));
  CHECK(contains(with("\"src\": 1", "\"src\": 100"), "'flows[0].src'"));
  CHECK(contains(with("\"dst\": 200", "\"dst\": 1"), "'flows[0].dst'"));
  CHECK(contains(with("\"duration_s\": 10", "\"duration_s\": 10, \"radio\": {\"difs_us\": 99}"),
                 "radio"));
  CHECK(contains(with("\"duration_s\": 10", "\"duration_s\": 10, \"ac_overrides\": {\"XX\": {}}"),
                 "'ac_overrides.XX'"));
  CHECK(contains(with("\"duration_s\": 10",
                      "\"duration_s\": 10, \"ac_overrides\": {\"VO\": {\"cw_min\": 6}}"),
                 "ac_overrides.VO"));
  CHECK(contains(with("\"duration_s\": 10", "\"duration_s\": 4, \"warmup_s\": 5"), "warmup_s"));
  CHECK(contains(with("{\"id\": 200, \"role\": \"wired-sink\"},", ""), "wired-sink"));
  CHECK(contains(with("\"id\": 1, \"role\": \"QSTA\"", "\"id\": 100, \"role\": \"QSTA\""),
                 "duplicate"));
  CHECK(contains(with("\"role\": \"BS\", \"position\": [0, 0]",
                      "\"role\": \"BS\", \"path\": {\"waypoints\": [[0,0],[1,0]], \"speed_mps\": 1}"),
                 "only QSTAs may move"));
  CHECK(contains(with("\"duration_s\": 10", "\"duration_s\": 10, \"load_multiplier\": 0"),
                 "load_multiplier"));
}

TEST_CASE("sha256 of known input") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
