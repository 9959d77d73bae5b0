#include "edcasim/mac_edcf.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace edcasim {

namespace {

bool is_pow2_minus_one(std::uint32_t v) { return ((v + 1) & v) == 0; }

}  // namespace

std::string_view to_string(AccessCategory ac) {
  switch (ac) {
    case AccessCategory::BK: return "BK";
    case AccessCategory::BE: return "BE";
    case AccessCategory::VI: return "VI";
    case AccessCategory::VO: return "VO";
  }
  return "?";
}

std::optional<AccessCategory> parse_access_category(std::string_view name) {
  for (auto ac : kAccessCategoriesByPriority) {
    if (to_string(ac) == name) return ac;
  }
  return std::nullopt;
}

AccessCategory classify(int priority) {
  switch (priority) {
    case 7:
    case 6: return AccessCategory::VO;
    case 5:
    case 4: return AccessCategory::VI;
    case 3:
    case 0: return AccessCategory::BE;
    case 2:
    case 1: return AccessCategory::BK;
    default:
      throw std::invalid_argument("user priority " + std::to_string(priority) +
                                  " outside [0, 7]");
  }
}

void AcParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (aifsn < 2) fail("aifsn must be >= 2");
  if (!is_pow2_minus_one(cw_min)) fail("cw_min must be of the form 2^k - 1");
  if (!is_pow2_minus_one(cw_max)) fail("cw_max must be of the form 2^k - 1");
  if (cw_min > cw_max) fail("cw_min must not exceed cw_max");
  if (retry_limit < 1) fail("retry_limit must be >= 1");
  if (queue_capacity < 1) fail("queue_capacity must be >= 1");
}

AcParams default_edca_params(AccessCategory ac) {
  switch (ac) {
    case AccessCategory::VO: return AcParams{2, 7, 15, 3008, 7, 50};
    case AccessCategory::VI: return AcParams{2, 15, 31, 6016, 7, 50};
    case AccessCategory::BE: return AcParams{3, 31, 1023, 0, 7, 50};
    case AccessCategory::BK: return AcParams{7, 31, 1023, 0, 7, 50};
  }
  throw std::logic_error("unreachable access category");
}

AcParams dcf_mode_params() { return AcParams{2, 31, 1023, 0, 7, 50}; }

SimTime aifs_duration(const AcParams& params, const RadioParams& radio) {
  return radio.sifs() + radio.slot() * params.aifsn;
}

std::string_view to_string(QueuePhase phase) {
  switch (phase) {
    case QueuePhase::Idle: return "idle";
    case QueuePhase::DeferringAifs: return "deferring-aifs";
    case QueuePhase::Backoff: return "backoff";
    case QueuePhase::Transmitting: return "transmitting";
    case QueuePhase::AwaitingAck: return "awaiting-ack";
  }
  return "?";
}

std::string_view to_string(MacMode mode) { return mode == MacMode::Dcf ? "DCF" : "EDCF"; }

EdcaQueue::EdcaQueue(AccessCategory ac, AcParams params)
    : ac_(ac), params_(params), cw_(params.cw_min) {
  params_.validate();
}

bool EdcaQueue::push(Frame frame) {
  if (fifo_.size() >= params_.queue_capacity) return false;
  fifo_.push_back(std::move(frame));
  return true;
}

bool EdcaQueue::start_contention(bool medium_idle_for_aifs, RandomStream& rng) {
  if (phase_ != QueuePhase::Idle) throw std::logic_error("start_contention: queue not idle");
  if (fifo_.empty()) throw std::logic_error("start_contention: queue empty");
  if (medium_idle_for_aifs) {
    backoff_counter_ = 0;
    phase_ = QueuePhase::DeferringAifs;
    return true;
  }
  draw_backoff(rng);
  return false;
}

void EdcaQueue::draw_backoff(RandomStream& rng) {
  backoff_counter_ = static_cast<std::uint32_t>(rng.uniform_int(0, cw_));
  phase_ = QueuePhase::DeferringAifs;
}

void EdcaQueue::on_aifs_complete() {
  if (phase_ == QueuePhase::DeferringAifs) phase_ = QueuePhase::Backoff;
}

void EdcaQueue::on_idle_slot() { on_idle_slots(1); }

void EdcaQueue::on_idle_slots(std::uint64_t count) {
  if (count == 0) return;
  if (phase_ != QueuePhase::Backoff) {
    throw std::logic_error("backoff countdown outside the backoff phase (" +
                           std::string(to_string(phase_)) + ")");
  }
  if (count > backoff_counter_) {
    throw std::logic_error("backoff counter would go negative");
  }
  backoff_counter_ -= static_cast<std::uint32_t>(count);
}

void EdcaQueue::on_medium_busy() {
  if (phase_ == QueuePhase::Backoff) phase_ = QueuePhase::DeferringAifs;
}

void EdcaQueue::begin_transmit() {
  if (fifo_.empty()) throw std::logic_error("begin_transmit: queue empty");
  phase_ = QueuePhase::Transmitting;
}

void EdcaQueue::await_ack() { phase_ = QueuePhase::AwaitingAck; }

Frame EdcaQueue::on_tx_success(SimTime now) {
  if (fifo_.empty()) throw std::logic_error("on_tx_success: queue empty");
  Frame done = std::move(fifo_.front());
  fifo_.pop_front();
  done.delivered_at = now;
  cw_ = params_.cw_min;
  retry_count_ = 0;
  phase_ = QueuePhase::Transmitting;
  return done;
}

EdcaQueue::FailureOutcome EdcaQueue::on_tx_failure(RandomStream& rng) {
  if (fifo_.empty()) throw std::logic_error("on_tx_failure: queue empty");
  FailureOutcome out;
  cw_ = std::min(2 * (cw_ + 1) - 1, params_.cw_max);
  ++retry_count_;
  fifo_.front().retry_count = retry_count_;
  if (retry_count_ > params_.retry_limit) {
    out.dropped = std::move(fifo_.front());
    fifo_.pop_front();
    cw_ = params_.cw_min;
    retry_count_ = 0;
  }
  draw_backoff(rng);
  return out;
}

Frame EdcaQueue::pop_head() {
  if (fifo_.empty()) throw std::logic_error("pop_head: queue empty");
  Frame f = std::move(fifo_.front());
  fifo_.pop_front();
  retry_count_ = 0;
  return f;
}

bool EdcaQueue::txop_burst_may_continue(SimTime elapsed, const RadioParams& radio) const {
  if (params_.txop_limit_us == 0 || fifo_.empty()) return false;
  const SimTime needed = elapsed + radio.sifs() + frame_airtime(fifo_.front().payload_bytes, radio) +
                         radio.sifs() + ack_airtime(radio);
  return needed.us() <= params_.txop_limit_us;
}

void EdcaQueue::end_post_backoff() {
  backoff_counter_ = 0;
  phase_ = QueuePhase::Idle;
}

std::vector<Frame> EdcaQueue::flush(bool keep_head) {
  std::vector<Frame> out;
  std::size_t keep = (keep_head && !fifo_.empty()) ? 1 : 0;
  while (fifo_.size() > keep) {
    out.push_back(std::move(fifo_.back()));
    fifo_.pop_back();
  }
  std::reverse(out.begin(), out.end());
  if (fifo_.empty()) retry_count_ = 0;
  return out;
}

// ---------------------------------------------------------------------------

StationMac::StationMac(NodeId id, MacMode mode, const RadioParams& radio,
                       const std::array<AcParams, 4>& edca_params, const AcParams& dcf_params)
    : id_(id), mode_(mode), radio_(radio) {
  if (mode == MacMode::Dcf) {
    queues_.emplace_back(AccessCategory::BE, dcf_params);
  } else {
    for (auto ac : kAccessCategoriesByPriority) {
      queues_.emplace_back(ac, edca_params[static_cast<std::size_t>(ac)]);
    }
  }
  for (const auto& q : queues_) aifs_.push_back(aifs_duration(q.params(), radio_));
  count_from_.assign(queues_.size(), SimTime());
  immediate_at_.assign(queues_.size(), std::nullopt);
  due_.assign(queues_.size(), false);
}

std::size_t StationMac::queue_index_for(const Frame& frame) const {
  if (mode_ == MacMode::Dcf) return 0;
  const AccessCategory ac = frame.is_data() ? classify(frame.priority) : AccessCategory::VO;
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    if (queues_[i].ac() == ac) return i;
  }
  throw std::logic_error("no queue for access category");
}

StationMac::EnqueueResult StationMac::enqueue(Frame frame, SimTime now, RandomStream& rng) {
  const std::size_t i = queue_index_for(frame);
  EdcaQueue& q = queues_[i];
  frame.enqueued_at = now;
  if (!q.push(std::move(frame))) return EnqueueResult::DroppedQueueFull;
  if (q.phase() == QueuePhase::Idle) {
    const bool idle_long_enough = busy_depth_ == 0 && now >= idle_since_ + aifs(i);
    if (q.start_contention(idle_long_enough, rng)) {
      immediate_at_[i] = now;
    } else {
      count_from_[i] = idle_since_;
    }
  }
  return EnqueueResult::Accepted;
}

SimTime StationMac::access_time(std::size_t index) const {
  if (immediate_at_[index]) return *immediate_at_[index];
  return reference(index) + aifs(index) + radio_.slot() * queues_[index].backoff_counter();
}

void StationMac::medium_busy(SimTime now) {
  if (busy_depth_++ > 0) return;
  due_at_.reset();
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    EdcaQueue& q = queues_[i];
    if (!q.contending()) continue;
    if (access_time(i) == now) {
      // Counter expires on this very boundary: the access still happens.
      if (!immediate_at_[i]) {
        q.on_aifs_complete();
        q.on_idle_slots(q.backoff_counter());
      }
      due_[i] = true;
      due_at_ = now;
      continue;
    }
    immediate_at_[i].reset();
    const SimTime aifs_end = reference(i) + aifs(i);
    if (now >= aifs_end) {
      q.on_aifs_complete();
      q.on_idle_slots((now - aifs_end).us() / radio_.slot_us);
    }
    q.on_medium_busy();
  }
}

void StationMac::medium_idle(SimTime now) {
  if (busy_depth_ <= 0) throw std::logic_error("medium_idle without matching medium_busy");
  if (--busy_depth_ > 0) return;
  idle_since_ = now;
  due_at_.reset();
  std::fill(due_.begin(), due_.end(), false);
}

std::optional<SimTime> StationMac::next_access() const {
  if (busy_depth_ > 0) return due_at_;
  std::optional<SimTime> best;
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    if (!queues_[i].contending()) continue;
    const SimTime t = access_time(i);
    if (!best || t < *best) best = t;
  }
  return best;
}

StationMac::Grant StationMac::grant(SimTime now, RandomStream& rng) {
  Grant out;
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    if (!queues_[i].contending()) continue;
    const bool is_ready = busy_depth_ > 0 ? (due_[i] && due_at_ == now) : access_time(i) == now;
    if (is_ready) ready.push_back(i);
  }
  due_at_.reset();
  std::fill(due_.begin(), due_.end(), false);

  for (std::size_t i : ready) {
    EdcaQueue& q = queues_[i];
    immediate_at_[i].reset();
    if (q.phase() == QueuePhase::DeferringAifs) q.on_aifs_complete();
    q.on_idle_slots(q.backoff_counter());
    if (q.empty()) {
      q.end_post_backoff();
      continue;
    }
    if (!out.winner) {
      // Queues are stored highest priority first.
      out.winner = i;
      q.begin_transmit();
      continue;
    }
    out.internal_losers.push_back(i);
    auto failure = q.on_tx_failure(rng);
    count_from_[i] = now;
    if (failure.dropped) out.dropped.push_back(std::move(*failure.dropped));
  }
  return out;
}

void StationMac::restart_contention(std::size_t index, SimTime now) {
  count_from_[index] = now;
  immediate_at_[index].reset();
}

std::optional<std::size_t> StationMac::active_queue() const {
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    const auto p = queues_[i].phase();
    if (p == QueuePhase::Transmitting || p == QueuePhase::AwaitingAck) return i;
  }
  return std::nullopt;
}

}  // namespace edcasim
