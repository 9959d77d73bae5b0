#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "edcasim/runner.hpp"

using namespace edcasim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("edcasim-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Scenario short_a() {
  Scenario s = preset("A");
  s.duration_s = 15;
  return s;
}

}  // namespace

TEST_CASE("mean and sample standard deviation") {
  auto m = mean_std({4.0, 4.0, 4.0});
  CHECK(m.mean == 4.0);
  CHECK(m.std == 0.0);
  m = mean_std({7.0});
  CHECK(m.mean == 7.0);
  CHECK(m.std == 0.0);
  m = mean_std({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.std == doctest::Approx(1.2909944487));
}

TEST_CASE("sweep returns one run per seed in seed order") {
  const auto runs = sweep(short_a(), {3, 4, 5}, 3, std::nullopt);
  REQUIRE(runs.size() == 3);
  CHECK(runs[0].seed == 3);
  CHECK(runs[2].seed == 5);
  CHECK(runs[1] == run_summary(short_a(), 4));
  const auto rows = aggregate(runs);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].flow_id == 1);
  CHECK(rows[0].throughput_Bps.mean > 0.0);
}

TEST_CASE("summary JSON round-trips") {
  const auto s = run_summary(preset("C"), 2);
  const auto text = summary_json(s);
  CHECK(parse_summary_json(text) == s);
  CHECK(summary_json(parse_summary_json(text)) == text);
}

TEST_CASE("delays CSV round-trips") {
  Simulation sim(short_a(), 1);
  sim.run();
  const auto parsed = parse_delays_csv(delays_csv(sim.metrics()));
  for (const auto& [id, c] : sim.metrics().flows()) CHECK(parsed.at(id) == c.delay_samples);
}

TEST_CASE("report re-derives identical files") {
  const auto dir = scratch("report");
  const auto s = run_to_directory(short_a(), 8, dir, true);
  for (const char* f : {"throughput.csv", "delays.csv", "delay_cdf.csv", "summary.json", "events.csv"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto cdf = read_file(dir / "delay_cdf.csv");
  const auto summary = read_file(dir / "summary.json");
  CHECK(report_directory(dir) == s);
  CHECK(read_file(dir / "delay_cdf.csv") == cdf);
  CHECK(read_file(dir / "summary.json") == summary);
  fs::remove_all(dir);
}

TEST_CASE("report detects tampered data") {
  const auto dir = scratch("tamper");
  run_to_directory(short_a(), 8, dir, false);
  auto text = read_file(dir / "delays.csv");
  text = text.substr(0, text.rfind('\n', text.size() - 2) + 1);  // drop the last sample
  write_file_atomic(dir / "delays.csv", text);
  CHECK_THROWS_AS(report_directory(dir), AuditError);
  fs::remove_all(dir);
}

TEST_CASE("DCF validation scenario rejects bad arguments") {
  CHECK_THROWS_AS(dcf_saturation_scenario(1, 800), ConfigError);
  CHECK_THROWS_AS(dcf_saturation_scenario(5, 0), ConfigError);
  CHECK_THROWS_AS(dcf_saturation_scenario(5, 5000), ConfigError);
  const auto s = dcf_saturation_scenario(5, 800, 10);
  CHECK(s.flows.size() == 5);
  CHECK(s.duration_s == doctest::Approx(15.0));
}

TEST_CASE("sweep writes per-seed directories") {
  const auto dir = scratch("sweep");
  sweep(short_a(), {1, 2}, 2, dir);
  CHECK(fs::exists(dir / "seed-1" / "summary.json"));
  CHECK(fs::exists(dir / "seed-2" / "throughput.csv"));
  fs::remove_all(dir);
}
