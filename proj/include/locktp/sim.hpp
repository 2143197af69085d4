#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <utility>
#include <vector>

#include "locktp/model.hpp"

namespace locktp::sim {

/// Phases of the queue-locked operation, in cycle order. A process whose
/// predecessor has not released yet parks in WaitTrue with the charged
/// read finished and idles at zero cost until the release is visible.
enum class Phase { Swap, WaitTrue, WaitFalse, Crit, Release, SetTrue, Parallel };

struct SimConfig {
  model::MachineParams machine;
  model::WorkloadParams workload;
  std::int64_t warmup_ops = 10;   // per-process ops discarded before the window
  std::int64_t measure_ops = 50;  // per-process ops counted

  void validate() const;  // throws std::invalid_argument
};

struct SimResult {
  std::int64_t ticks = 0;      // measured-window length in work units
  std::int64_t total_ops = 0;  // ops completed inside the window
  double throughput = 0.0;     // total_ops * alpha / ticks, ops per second
  model::Regime observed_regime = model::Regime::Unsaturated;
  std::vector<std::int64_t> per_process_ops;  // window counts by process index
};

/// Regime the run actually exhibited: saturated iff some process spent a
/// tick of the window waiting in the queue.
model::Regime observed_regime(const SimResult& result);

/// Deterministic discrete-time simulation of N processes running the
/// queue-locked operation under the uniform scheduler (every process
/// advances one work unit per tick). Costs per phase: Swap = W, the
/// wait-loop read that returns true = R_I (charged only when the
/// predecessor has not released by the time of the first read), the read
/// that returns false = R_I, Crit = C, Release = W, SetTrue = W,
/// Parallel = P. A release at tick t becomes visible at t+1. Same-tick
/// swaps enqueue in process-index order.
///
/// One Simulator instance must not be shared across threads; independent
/// instances may run concurrently.
class Simulator {
 public:
  explicit Simulator(const SimConfig& config);

  SimResult run();

  /// Swap-completion order over the whole run, one process id per
  /// operation. Filled by run().
  const std::vector<int>& swap_order() const { return swap_order_; }
  /// Critical-section entry order. FIFO means it equals swap_order().
  const std::vector<int>& acquisition_order() const { return acquisition_order_; }

 private:
  struct ProcessState {
    Phase phase = Phase::Swap;
    std::int64_t phase_end = 0;  // tick at whose end the current phase completes
    bool pending_read = false;   // swap done; first wait-loop read decided next tick
    bool parked = false;         // WaitTrue read done, idling at zero cost
    std::int64_t completed_ops = 0;
    std::int64_t queue_entry = -1;
  };

  // Queue of lock requests in swap order; entry 0 is the initial dummy
  // node, already released.
  struct LockQueue {
    struct Entry {
      int owner = -1;
      std::int64_t release_tick = -1;  // -1 while the owner still holds
      int parked_waiter = -1;
    };
    std::vector<Entry> entries;
  };

  void handle_completion(int p, std::int64_t t);
  void schedule(int p, Phase phase, std::int64_t end_tick);
  void complete_op(int p);
  void note_wait_until(std::int64_t tick);

  SimConfig cfg_;
  std::int64_t w_ = 0;    // integer phase costs
  std::int64_t r_i_ = 0;

  // (tick, process); the index breaks same-tick ties deterministically.
  std::priority_queue<std::pair<std::int64_t, int>,
                      std::vector<std::pair<std::int64_t, int>>, std::greater<>>
      events_;
  std::vector<ProcessState> procs_;
  LockQueue queue_;
  std::vector<int> swap_order_;
  std::vector<int> acquisition_order_;

  int in_crit_ = 0;  // processes in Crit or Release; must never exceed 1
  int warm_pending_ = 0;
  int done_pending_ = 0;
  bool window_open_ = false;
  std::int64_t window_start_ = 0;
  std::vector<std::int64_t> ops_at_window_start_;
  std::int64_t last_wait_tick_ = 0;
};

SimResult simulate(const SimConfig& config);

}  // namespace locktp::sim
