#include "edcasim/traffic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace edcasim {

void FlowSpec::validate() const {
  const std::string where = "flow " + std::to_string(flow_id) + ": ";
  if (priority < 0 || priority > 7) throw std::invalid_argument(where + "priority outside [0, 7]");
  if (interval_us == 0) throw std::invalid_argument(where + "interval_us must be positive");
  if (!(size_mean_bytes >= 1.0 && size_mean_bytes <= kMaxMsduBytes)) {
    throw std::invalid_argument(where + "size_mean_bytes outside [1, 2304]");
  }
  if (!(size_std_bytes >= 0.0) || !std::isfinite(size_std_bytes)) {
    throw std::invalid_argument(where + "size_std_bytes must be >= 0");
  }
  if (stop_at <= start_at) throw std::invalid_argument(where + "stop must be after start");
}

double offered_rate_bps(const FlowSpec& spec) {
  return 8.0 * spec.size_mean_bytes / (static_cast<double>(spec.interval_us) * 1e-6);
}

Frame next_packet(const FlowSpec& spec, SimTime now, std::uint64_t frame_id, RandomStream& rng) {
  const double size =
      rng.normal_truncated(spec.size_mean_bytes, spec.size_std_bytes, 1.0, kMaxMsduBytes);
  Frame f;
  f.id = frame_id;
  f.flow_id = spec.flow_id;
  f.priority = static_cast<std::uint8_t>(spec.priority);
  f.src = spec.src;
  f.payload_bytes = static_cast<std::uint32_t>(std::lround(size));
  f.type = FrameType::Data;
  f.created_at = now;
  return f;
}

TrafficSource::TrafficSource(FlowSpec spec, std::uint64_t interval_us)
    : spec_(spec), interval_us_(interval_us) {
  spec_.validate();
  if (interval_us_ == 0) throw std::invalid_argument("traffic source interval must be positive");
}

std::optional<SimTime> TrafficSource::next_arrival() const {
  const SimTime t = spec_.start_at + SimTime(interval_us_) * emitted_;
  if (t >= spec_.stop_at) return std::nullopt;
  return t;
}

Frame TrafficSource::emit(SimTime now, std::uint64_t frame_id, RandomStream& rng) {
  ++emitted_;
  return next_packet(spec_, now, frame_id, rng);
}

}  // namespace edcasim
