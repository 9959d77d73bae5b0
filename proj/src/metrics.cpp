#include "edcasim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace edcasim {

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::Queue: return "queue";
    case DropReason::Retry: return "retry";
    case DropReason::Unassociated: return "unassociated";
    case DropReason::Wired: return "wired";
  }
  return "?";
}

std::string_view to_string(FrameEventKind kind) {
  switch (kind) {
    case FrameEventKind::Generated: return "generated";
    case FrameEventKind::Enqueued: return "enqueue";
    case FrameEventKind::TxStart: return "tx-start";
    case FrameEventKind::TxEnd: return "tx-end";
    case FrameEventKind::MacAcked: return "mac-acked";
    case FrameEventKind::Forwarded: return "forwarded";
    case FrameEventKind::Delivered: return "delivered";
    case FrameEventKind::Dropped: return "dropped";
  }
  return "?";
}

ThroughputSeries::ThroughputSeries(SimTime start, SimTime end, SimTime bin_width)
    : start_(start), bin_width_(bin_width) {
  if (bin_width.us() == 0) throw std::invalid_argument("throughput bin width must be positive");
  const std::uint64_t span = end > start ? (end - start).us() : 0;
  bin_count_ = static_cast<std::size_t>((span + bin_width.us() - 1) / bin_width.us());
}

void ThroughputSeries::ensure_flow(std::int32_t flow_id) {
  bins_.try_emplace(flow_id, bin_count_, 0);
}

void ThroughputSeries::add(std::int32_t flow_id, SimTime at, std::uint64_t bytes) {
  if (at < start_) return;
  const auto index = static_cast<std::size_t>((at - start_).us() / bin_width_.us());
  if (index >= bin_count_) return;
  ensure_flow(flow_id);
  bins_[flow_id][index] += bytes;
}

const std::vector<std::uint64_t>& ThroughputSeries::bins(std::int32_t flow_id) const {
  auto it = bins_.find(flow_id);
  if (it == bins_.end()) throw std::out_of_range("no throughput series for flow");
  return it->second;
}

DelayCdf::DelayCdf(std::span<const SimTime> samples) : sorted_(samples.begin(), samples.end()) {
  std::sort(sorted_.begin(), sorted_.end());
}

double DelayCdf::fraction_at(SimTime d) const {
  if (sorted_.empty()) return 0.0;
  const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), d) - sorted_.begin();
  return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

std::vector<std::pair<SimTime, double>> DelayCdf::points() const {
  std::vector<std::pair<SimTime, double>> out;
  const double n = static_cast<double>(sorted_.size());
  for (std::size_t i = 0; i < sorted_.size(); ++i) {
    if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;
    out.emplace_back(sorted_[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

std::optional<SimTime> delay_quantile(std::span<const SimTime> samples, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("quantile must lie in (0, 1]");
  if (samples.empty()) return std::nullopt;
  std::vector<SimTime> sorted(samples.begin(), samples.end());
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   sorted.end());
  return sorted[rank - 1];
}

std::optional<double> normalized_throughput(const FlowCounters& counters) {
  if (counters.bytes_generated == 0) return std::nullopt;
  return static_cast<double>(counters.bytes_delivered) /
         static_cast<double>(counters.bytes_generated);
}

double differentiation_index(double high, double low) {
  if (high + low == 0.0) return 0.0;
  return (high - low) / (high + low);
}

MetricsCollector::MetricsCollector(SimTime warmup, SimTime end, SimTime bin_width)
    : warmup_(warmup), series_(warmup, end, bin_width) {}

void MetricsCollector::add_flow(std::int32_t flow_id) {
  flows_.try_emplace(flow_id);
  in_flight_.try_emplace(flow_id, 0);
  series_.ensure_flow(flow_id);
}

const FlowCounters& MetricsCollector::counters(std::int32_t flow_id) const {
  auto it = flows_.find(flow_id);
  if (it == flows_.end()) throw std::out_of_range("unknown flow " + std::to_string(flow_id));
  return it->second;
}

std::uint64_t MetricsCollector::in_flight(std::int32_t flow_id) const {
  auto it = in_flight_.find(flow_id);
  return it == in_flight_.end() ? 0 : it->second;
}

void MetricsCollector::record(const FrameEvent& ev) {
  if (ev.flow_id < 0) return;  // management traffic is not measured

  if (ev.kind == FrameEventKind::Generated) {
    if (pending_.contains(ev.frame_id) || resolved_.contains(ev.frame_id)) {
      throw AuditError("frame " + std::to_string(ev.frame_id) + " generated twice");
    }
    add_flow(ev.flow_id);
    const bool measured = ev.time >= warmup_;
    pending_.emplace(ev.frame_id, Pending{ev.flow_id, ev.time, ev.bytes, measured});
    if (measured) {
      auto& c = flows_[ev.flow_id];
      ++c.generated;
      c.bytes_generated += ev.bytes;
      ++in_flight_[ev.flow_id];
    }
    return;
  }

  const bool resolves = ev.kind == FrameEventKind::Delivered || ev.kind == FrameEventKind::Dropped;
  auto it = pending_.find(ev.frame_id);
  if (it == pending_.end()) {
    const bool on_air = ev.kind == FrameEventKind::TxStart || ev.kind == FrameEventKind::TxEnd ||
                        ev.kind == FrameEventKind::MacAcked;
    if (on_air && resolved_.contains(ev.frame_id)) return;
    throw AuditError("event '" + std::string(to_string(ev.kind)) + "' for unknown frame " +
                     std::to_string(ev.frame_id));
  }
  if (!resolves) return;

  const Pending p = it->second;
  pending_.erase(it);
  resolved_.insert(ev.frame_id);
  if (p.flow_id != ev.flow_id) {
    throw AuditError("frame " + std::to_string(ev.frame_id) + " changed flow");
  }
  if (!p.measured) return;

  auto& c = flows_[p.flow_id];
  --in_flight_[p.flow_id];
  if (ev.kind == FrameEventKind::Delivered) {
    ++c.delivered;
    c.bytes_delivered += p.bytes;
    c.delay_samples.push_back(ev.time - p.created_at);
    series_.add(p.flow_id, ev.time, p.bytes);
    return;
  }
  if (!ev.reason) throw AuditError("drop event without a reason");
  switch (*ev.reason) {
    case DropReason::Queue: ++c.dropped_queue; break;
    case DropReason::Retry: ++c.dropped_retry; break;
    case DropReason::Unassociated: ++c.dropped_unassociated; break;
    case DropReason::Wired: ++c.dropped_wired; break;
  }
}

}  // namespace edcasim
