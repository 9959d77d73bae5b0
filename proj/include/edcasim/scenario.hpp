#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edcasim/geometry.hpp"
#include "edcasim/mac_edcf.hpp"
#include "edcasim/mobility.hpp"
#include "edcasim/phy_channel.hpp"
#include "edcasim/traffic.hpp"

namespace edcasim {

/// Invalid scenario file or CLI configuration. The message names the
/// offending key.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class StationRole : std::uint8_t { Qsta, BaseStation, WiredSink };

std::string_view to_string(StationRole role);

struct StationSpec {
  NodeId id = 0;
  StationRole role = StationRole::Qsta;
  Position position;                 // static position (ignored when `path` is set)
  std::optional<WaypointPath> path;  // QSTAs only
  std::optional<double> range_m;     // overrides radio.range_m

  bool operator==(const StationSpec&) const = default;
};

struct Scenario {
  std::string name = "custom";
  double duration_s = 100.0;
  double warmup_s = 5.0;
  MacMode mac_mode = MacMode::Edcf;
  double load_multiplier = 1.0;
  RadioParams radio;
  WiredLinkParams wired;
  std::array<AcParams, 4> edca = {default_edca_params(AccessCategory::BK),
                                  default_edca_params(AccessCategory::BE),
                                  default_edca_params(AccessCategory::VI),
                                  default_edca_params(AccessCategory::VO)};
  AcParams dcf = dcf_mode_params();
  std::vector<StationSpec> stations;
  std::vector<FlowSpec> flows;
  std::uint64_t mobility_tick_us = 10'000;
  std::uint64_t handshake_timeout_us = 1'000'000;
  double bin_width_s = 1.0;

  AcParams& ac(AccessCategory a) { return edca[static_cast<std::size_t>(a)]; }
  const AcParams& ac(AccessCategory a) const { return edca[static_cast<std::size_t>(a)]; }
  const StationSpec* station(NodeId id) const;

  SimTime duration() const { return SimTime::seconds(duration_s); }
  SimTime warmup() const { return SimTime::seconds(warmup_s); }
  /// Arrival period of a flow after applying the load multiplier.
  std::uint64_t effective_interval_us(const FlowSpec& flow) const;

  /// Cross-field checks; throws ConfigError.
  void validate() const;

  bool operator==(const Scenario&) const = default;
};

inline constexpr int kScenarioSchemaVersion = 1;

/// Preset names accepted by load_scenario.
std::vector<std::string> preset_names();
Scenario preset(std::string_view name);

/// Parses and validates a scenario document (JSON text).
Scenario parse_scenario(std::string_view json_text);
/// A preset name or a path to a scenario file.
Scenario load_scenario(std::string_view path_or_preset);
/// Canonical serialization; parse_scenario(emit_scenario(s)) == s.
std::string emit_scenario(const Scenario& scenario);
/// Hex SHA-256 of the canonical serialization.
std::string scenario_hash(const Scenario& scenario);

std::string sha256_hex(std::string_view data);

}  // namespace edcasim
