#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>
#include <vector>

#include "edcasim/phy_channel.hpp"
#include "edcasim/sim_core.hpp"

namespace edcasim {

/// EDCF access categories. The enumerator value is the priority rank.
enum class AccessCategory : std::uint8_t { BK = 0, BE = 1, VI = 2, VO = 3 };

inline constexpr std::array<AccessCategory, 4> kAccessCategoriesByPriority = {
    AccessCategory::VO, AccessCategory::VI, AccessCategory::BE, AccessCategory::BK};

std::string_view to_string(AccessCategory ac);
std::optional<AccessCategory> parse_access_category(std::string_view name);

/// 802.1D user priority (0-7) to access category. Throws on out-of-range input.
AccessCategory classify(int priority);

struct AcParams {
  std::uint32_t aifsn = 2;
  std::uint32_t cw_min = 31;
  std::uint32_t cw_max = 1023;
  std::uint64_t txop_limit_us = 0;  // 0: one frame per channel access
  std::uint32_t retry_limit = 7;
  std::size_t queue_capacity = 50;

  void validate() const;
  bool operator==(const AcParams&) const = default;
};

AcParams default_edca_params(AccessCategory ac);

/// Legacy DCF: DIFS deference (AIFSN 2), CW 31..1023, no bursting.
AcParams dcf_mode_params();

/// SIFS + AIFSN slots. With AIFSN 2 this is DIFS.
SimTime aifs_duration(const AcParams& params, const RadioParams& radio);

enum class FrameType : std::uint8_t { Data, AssocRequest, AssocResponse };

inline constexpr std::int32_t kNoFlow = -1;

struct Frame {
  std::uint64_t id = 0;
  std::int32_t flow_id = kNoFlow;
  std::uint8_t priority = 0;
  NodeId src = 0;
  NodeId dst = 0;  // next wireless hop
  std::uint32_t payload_bytes = 0;
  FrameType type = FrameType::Data;
  SimTime created_at;
  std::optional<SimTime> enqueued_at;
  std::optional<SimTime> first_tx_at;
  std::optional<SimTime> delivered_at;
  std::uint32_t retry_count = 0;
  std::uint64_t in_reply_to = 0;  // AssocResponse: id of the request it answers

  bool is_data() const { return type == FrameType::Data; }
};

enum class QueuePhase : std::uint8_t { Idle, DeferringAifs, Backoff, Transmitting, AwaitingAck };

std::string_view to_string(QueuePhase phase);

/// One transmit queue with its contention state: the unit EDCF replicates per
/// access category and DCF uses once.
class EdcaQueue {
public:
  EdcaQueue(AccessCategory ac, AcParams params);

  AccessCategory ac() const { return ac_; }
  const AcParams& params() const { return params_; }

  /// False (frame not stored) when the queue is at capacity.
  bool push(Frame frame);
  bool empty() const { return fifo_.empty(); }
  std::size_t size() const { return fifo_.size(); }
  const Frame& head() const { return fifo_.front(); }
  Frame& head() { return fifo_.front(); }
  const std::deque<Frame>& frames() const { return fifo_; }

  /// Begins contention for a newly queued head frame. Returns true when the
  /// frame may go out without backoff (medium idle for at least AIFS and no
  /// backoff pending); otherwise draws a backoff counter in [0, cw].
  bool start_contention(bool medium_idle_for_aifs, RandomStream& rng);
  void draw_backoff(RandomStream& rng);

  void on_aifs_complete();
  void on_idle_slot();
  void on_idle_slots(std::uint64_t count);
  /// Medium went busy: any further countdown needs a fresh AIFS.
  void on_medium_busy();

  void begin_transmit();
  void await_ack();

  /// Pops the acknowledged head frame, stamps delivered_at and resets cw and
  /// the retry counter. The queue stays in the transmitting phase so a TXOP
  /// burst may continue; call draw_backoff or end_post_backoff afterwards.
  Frame on_tx_success(SimTime now);

  struct FailureOutcome {
    std::optional<Frame> dropped;  // set when the retry limit was exceeded
  };
  /// Doubles cw (clamped to cw_max), bumps the retry counter, drops the head
  /// frame past the retry limit, and redraws the backoff.
  FailureOutcome on_tx_failure(RandomStream& rng);

  /// Removes the head frame outside the normal success/failure paths.
  Frame pop_head();

  /// Whether another frame fits in the current TXOP after `elapsed` of it.
  bool txop_burst_may_continue(SimTime elapsed, const RadioParams& radio) const;

  /// Post-backoff finished with nothing queued.
  void end_post_backoff();

  /// Removes all frames except, optionally, the head that is on the air.
  std::vector<Frame> flush(bool keep_head);

  std::uint32_t cw() const { return cw_; }
  std::uint32_t backoff_counter() const { return backoff_counter_; }
  std::uint32_t retry_count() const { return retry_count_; }
  QueuePhase phase() const { return phase_; }
  bool contending() const {
    return phase_ == QueuePhase::DeferringAifs || phase_ == QueuePhase::Backoff;
  }

private:
  AccessCategory ac_;
  AcParams params_;
  std::deque<Frame> fifo_;
  std::uint32_t cw_;
  std::uint32_t backoff_counter_ = 0;
  std::uint32_t retry_count_ = 0;
  QueuePhase phase_ = QueuePhase::Idle;
};

enum class MacMode : std::uint8_t { Dcf, Edcf };

std::string_view to_string(MacMode mode);

/// Per-station channel access: one queue (DCF) or four (EDCF), the station's
/// view of the medium, backoff countdown timing and virtual collision
/// resolution. The caller drives it with medium transitions and grant
/// callbacks at the instants returned by next_access().
class StationMac {
public:
  StationMac(NodeId id, MacMode mode, const RadioParams& radio,
             const std::array<AcParams, 4>& edca_params, const AcParams& dcf_params);

  NodeId id() const { return id_; }
  MacMode mode() const { return mode_; }

  std::size_t queue_count() const { return queues_.size(); }
  EdcaQueue& queue(std::size_t index) { return queues_[index]; }
  const EdcaQueue& queue(std::size_t index) const { return queues_[index]; }
  /// Queue index for a frame: by priority in EDCF (management frames use VO),
  /// always 0 in DCF.
  std::size_t queue_index_for(const Frame& frame) const;

  enum class EnqueueResult { Accepted, DroppedQueueFull };
  EnqueueResult enqueue(Frame frame, SimTime now, RandomStream& rng);

  void medium_busy(SimTime now);
  void medium_idle(SimTime now);
  bool medium_idle_now() const { return busy_depth_ == 0; }
  SimTime idle_since() const { return idle_since_; }

  /// Earliest instant at which some queue wins access, given no further
  /// medium activity.
  std::optional<SimTime> next_access() const;

  struct Grant {
    std::optional<std::size_t> winner;       // queue index now transmitting
    std::vector<std::size_t> internal_losers;
    std::vector<Frame> dropped;               // retry-limit drops among losers
  };
  /// Resolves which queue(s) reach access at `now`; the highest-priority one
  /// wins and the others take the failure path.
  Grant grant(SimTime now, RandomStream& rng);

  /// Called after a queue's exchange (or burst) ends; restarts contention
  /// counting from `now` for that queue.
  void restart_contention(std::size_t index, SimTime now);

  /// Index of the queue currently transmitting or awaiting an ACK.
  std::optional<std::size_t> active_queue() const;

  SimTime access_time(std::size_t index) const;

private:
  SimTime aifs(std::size_t index) const { return aifs_[index]; }
  SimTime reference(std::size_t index) const {
    return std::max(idle_since_, count_from_[index]);
  }

  NodeId id_;
  MacMode mode_;
  RadioParams radio_;
  std::vector<EdcaQueue> queues_;  // EDCF: VO, VI, BE, BK
  std::vector<SimTime> aifs_;
  std::vector<SimTime> count_from_;
  std::vector<std::optional<SimTime>> immediate_at_;
  std::vector<bool> due_;
  std::optional<SimTime> due_at_;
  int busy_depth_ = 0;
  SimTime idle_since_;
};

}  // namespace edcasim
