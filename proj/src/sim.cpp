#include "locktp/sim.hpp"

#include <cmath>
#include <stdexcept>

namespace locktp::sim {

using model::Regime;

namespace {

std::int64_t integer_cost(double v, const char* name) {
  const double rounded = std::nearbyint(v);
  if (!(rounded >= 1.0) || rounded > 1e15) {
    throw std::invalid_argument(std::string("sim: ") + name +
                                " must round to a positive integer work count");
  }
  return static_cast<std::int64_t>(rounded);
}

}  // namespace

void SimConfig::validate() const {
  workload.validate();
  if (!(machine.alpha > 0.0)) throw std::invalid_argument("sim: alpha must be positive");
  integer_cost(machine.w, "w");
  integer_cost(machine.r_i, "r_i");
  if (warmup_ops < 0) throw std::invalid_argument("sim: warmup_ops must be non-negative");
  if (measure_ops < 1) {
    throw std::invalid_argument(
        "sim: measure_ops must be at least 1; a zero-op measurement window means "
        "the warmup configuration is broken");
  }
}

Regime observed_regime(const SimResult& result) { return result.observed_regime; }

Simulator::Simulator(const SimConfig& config) : cfg_(config) {
  cfg_.validate();
  w_ = integer_cost(cfg_.machine.w, "w");
  r_i_ = integer_cost(cfg_.machine.r_i, "r_i");
  procs_.assign(static_cast<std::size_t>(cfg_.workload.n), {});
  queue_.entries.push_back({-1, 0, -1});  // dummy head, released before tick 1
  warm_pending_ = cfg_.workload.n;
  done_pending_ = cfg_.workload.n;
}

void Simulator::note_wait_until(std::int64_t tick) {
  if (tick > last_wait_tick_) last_wait_tick_ = tick;
}

void Simulator::schedule(int p, Phase phase, std::int64_t end_tick) {
  auto& proc = procs_[static_cast<std::size_t>(p)];
  proc.parked = false;
  proc.phase = phase;
  proc.phase_end = end_tick;
  events_.push({end_tick, p});
}

void Simulator::complete_op(int p) {
  auto& proc = procs_[static_cast<std::size_t>(p)];
  ++proc.completed_ops;
  if (proc.completed_ops == cfg_.warmup_ops) --warm_pending_;
  if (proc.completed_ops == cfg_.warmup_ops + cfg_.measure_ops) --done_pending_;
}

void Simulator::handle_completion(int p, std::int64_t t) {
  auto& proc = procs_[static_cast<std::size_t>(p)];
  if (proc.pending_read) {
    // t is the tick of the first wait-loop read. A release from tick t-1
    // or earlier is visible now, whichever order the tick t-1 events were
    // drained in; a release at tick t is not visible until t+1.
    proc.pending_read = false;
    const auto& pred = queue_.entries[static_cast<std::size_t>(proc.queue_entry - 1)];
    if (pred.release_tick >= 0 && pred.release_tick < t) {
      schedule(p, Phase::WaitFalse, t + r_i_ - 1);
    } else {
      schedule(p, Phase::WaitTrue, t + r_i_ - 1);
      note_wait_until(t + r_i_ - 1);
    }
    return;
  }
  switch (proc.phase) {
    case Phase::Swap: {
      queue_.entries.push_back({p, -1, -1});
      proc.queue_entry = static_cast<std::int64_t>(queue_.entries.size()) - 1;
      swap_order_.push_back(p);
      // The read itself is decided at t+1, once every same-tick release
      // has been recorded.
      proc.pending_read = true;
      events_.push({t + 1, p});
      break;
    }
    case Phase::WaitTrue: {
      auto& pred = queue_.entries[static_cast<std::size_t>(proc.queue_entry - 1)];
      if (pred.release_tick >= 0) {
        schedule(p, Phase::WaitFalse, t + r_i_);
      } else {
        proc.parked = true;  // idle at zero cost until the release event
        pred.parked_waiter = p;
      }
      break;
    }
    case Phase::WaitFalse: {
      if (swap_order_[acquisition_order_.size()] != p) {
        throw std::logic_error("sim: FIFO violation, acquisition out of swap order");
      }
      acquisition_order_.push_back(p);
      if (++in_crit_ > 1) throw std::logic_error("sim: mutual exclusion violated");
      schedule(p, Phase::Crit, t + cfg_.workload.c);
      break;
    }
    case Phase::Crit: {
      schedule(p, Phase::Release, t + w_);
      break;
    }
    case Phase::Release: {
      auto& entry = queue_.entries[static_cast<std::size_t>(proc.queue_entry)];
      entry.release_tick = t;
      --in_crit_;
      if (entry.parked_waiter >= 0) {
        // The successor idled through tick t; its false-returning read
        // occupies t+1 .. t+R_I.
        note_wait_until(t);
        schedule(entry.parked_waiter, Phase::WaitFalse, t + r_i_);
      }
      schedule(p, Phase::SetTrue, t + w_);
      break;
    }
    case Phase::SetTrue: {
      if (cfg_.workload.p > 0) {
        schedule(p, Phase::Parallel, t + cfg_.workload.p);
      } else {
        complete_op(p);
        schedule(p, Phase::Swap, t + w_);
      }
      break;
    }
    case Phase::Parallel: {
      complete_op(p);
      schedule(p, Phase::Swap, t + w_);
      break;
    }
  }
}

SimResult Simulator::run() {
  const int n = cfg_.workload.n;
  for (int p = 0; p < n; ++p) schedule(p, Phase::Swap, w_);

  ops_at_window_start_.assign(static_cast<std::size_t>(n), 0);
  if (cfg_.warmup_ops == 0) {
    window_open_ = true;
    window_start_ = 0;
    warm_pending_ = 0;
  }

  SimResult result;
  while (true) {
    if (events_.empty()) throw std::logic_error("sim: no runnable process");
    const std::int64_t t = events_.top().first;

    // Drain every completion of this tick, in process-index order, before
    // any end-of-tick bookkeeping; transitions never schedule same-tick
    // follow-ups.
    while (!events_.empty() && events_.top().first == t) {
      const int p = events_.top().second;
      events_.pop();
      handle_completion(p, t);
    }

    if (!window_open_ && warm_pending_ == 0) {
      window_open_ = true;
      window_start_ = t;
      for (int p = 0; p < n; ++p) {
        ops_at_window_start_[static_cast<std::size_t>(p)] =
            procs_[static_cast<std::size_t>(p)].completed_ops;
      }
    }
    if (window_open_ && done_pending_ == 0) {
      result.ticks = t - window_start_;
      break;
    }
  }

  result.per_process_ops.assign(static_cast<std::size_t>(n), 0);
  for (int p = 0; p < n; ++p) {
    result.per_process_ops[static_cast<std::size_t>(p)] =
        procs_[static_cast<std::size_t>(p)].completed_ops -
        ops_at_window_start_[static_cast<std::size_t>(p)];
    result.total_ops += result.per_process_ops[static_cast<std::size_t>(p)];
  }
  if (result.total_ops <= 0 || result.ticks <= 0) {
    throw std::runtime_error("sim: empty measurement window");
  }
  result.throughput = static_cast<double>(result.total_ops) * cfg_.machine.alpha /
                      static_cast<double>(result.ticks);

  bool waiting_at_end = false;
  for (const auto& proc : procs_) {
    waiting_at_end |= proc.parked || proc.phase == Phase::WaitTrue;
  }
  result.observed_regime = (last_wait_tick_ > window_start_ || waiting_at_end)
                               ? Regime::Saturated
                               : Regime::Unsaturated;
  return result;
}

SimResult simulate(const SimConfig& config) { return Simulator(config).run(); }

}  // namespace locktp::sim
