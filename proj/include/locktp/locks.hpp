#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace locktp::locks {

/// One work unit = one iteration of this loop. The empty volatile asm is
/// an opaque sink: the compiler must execute it once per iteration, so the
/// loop survives optimization and costs a fixed handful of cycles per
/// unit. The absolute cycle count is absorbed into the calibrated alpha.
inline void work_loop(std::int64_t units) {
  for (std::int64_t i = 0; i < units; ++i) {
#if defined(__GNUC__) || defined(__clang__)
    asm volatile("");
#else
    volatile std::int64_t sink = i;
    (void)sink;
#endif
  }
}

/// Counted no-op workload, sized in work units.
struct WorkLoop {
  std::int64_t units = 0;
  void operator()() const { work_loop(units); }
};

/// CLH queue lock. Each acquirer swaps its node into the shared tail and
/// spins on the predecessor's flag; release clears the own flag, then the
/// predecessor's node is adopted and re-armed for the next acquisition.
/// FIFO-fair by construction: critical sections run in swap order.
///
/// Nodes are padded to a cache line and owned by the lock; handles move
/// raw pointers between them, so a Handle must not outlive its lock.
///
/// spin_yield_threshold > 0 makes waiters call std::this_thread::yield()
/// after that many failed spins, which keeps oversubscribed runs (more
/// threads than cores) live. Benchmarks use the default pure spin; the
/// cost model assumes waiters stay on their core.
class ClhLock {
 public:
  static constexpr std::size_t kCacheLine = 64;

  struct alignas(kCacheLine) Node {
    std::atomic<bool> locked{false};
  };

  class Handle {
   public:
    explicit Handle(ClhLock& lock) : node_(lock.make_node(true)) {}
    Handle(Handle&&) = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    Handle& operator=(Handle&&) = default;

   private:
    friend class ClhLock;
    Node* node_;            // re-armed true, ready to enqueue
    Node* pred_ = nullptr;  // set by enqueue(), consumed by unlock()
  };

  explicit ClhLock(std::int64_t spin_yield_threshold = 0)
      : spin_yield_threshold_(spin_yield_threshold) {
    head_.store(make_node(false), std::memory_order_relaxed);
  }
  ClhLock(const ClhLock&) = delete;
  ClhLock& operator=(const ClhLock&) = delete;

  /// First half of lock(): one atomic swap publishes our node as the new
  /// tail and hands back the predecessor. Split from await() so tests can
  /// serialize an order recorder around the swap.
  void enqueue(Handle& h) {
    h.pred_ = head_.exchange(h.node_, std::memory_order_acq_rel);
  }

  /// Second half of lock(): spin while the predecessor still holds.
  void await(const Handle& h) const {
    std::int64_t spins = 0;
    while (h.pred_->locked.load(std::memory_order_acquire)) {
      if (spin_yield_threshold_ > 0 && ++spins >= spin_yield_threshold_) {
        std::this_thread::yield();
        spins = 0;
      }
    }
  }

  void lock(Handle& h) {
    enqueue(h);
    await(h);
  }

  /// Clears our flag, then adopts the predecessor's retired node and
  /// re-arms it for our next enqueue.
  void unlock(Handle& h) {
    h.node_->locked.store(false, std::memory_order_release);
    h.node_ = h.pred_;
    // Nobody can reach the adopted node until our next swap publishes it.
    h.node_->locked.store(true, std::memory_order_relaxed);
  }

 private:
  friend class Handle;

  Node* make_node(bool locked) {
    std::lock_guard<std::mutex> g(pool_mu_);
    pool_.push_back(std::make_unique<Node>());
    pool_.back()->locked.store(locked, std::memory_order_relaxed);
    return pool_.back().get();
  }

  std::atomic<Node*> head_{nullptr};
  std::int64_t spin_yield_threshold_;
  std::mutex pool_mu_;  // registration only, never on the lock path
  std::vector<std::unique_ptr<Node>> pool_;
};

/// Single-word test-and-set lock: acquire by CAS(0 -> 1), release by a
/// plain store of 0. No fairness guarantee; kept for measurement
/// comparison against the queue lock.
class SpinLock {
 public:
  explicit SpinLock(std::int64_t spin_yield_threshold = 0)
      : spin_yield_threshold_(spin_yield_threshold) {}
  SpinLock(const SpinLock&) = delete;
  SpinLock& operator=(const SpinLock&) = delete;

  struct Handle {
    explicit Handle(SpinLock&) {}
  };

  void lock() {
    std::int64_t spins = 0;
    for (;;) {
      std::uint32_t expected = 0;
      if (flag_.compare_exchange_weak(expected, 1, std::memory_order_acquire,
                                      std::memory_order_relaxed)) {
        return;
      }
      if (spin_yield_threshold_ > 0 && ++spins >= spin_yield_threshold_) {
        std::this_thread::yield();
        spins = 0;
      }
    }
  }

  void unlock() { flag_.store(0, std::memory_order_release); }

  void lock(Handle&) { lock(); }
  void unlock(Handle&) { unlock(); }

 private:
  alignas(ClhLock::kCacheLine) std::atomic<std::uint32_t> flag_{0};
  std::int64_t spin_yield_threshold_;
};

/// One coarse-grained operation: acquire, C units under the lock, release,
/// P units outside it.
template <typename Lock>
void run_operation(Lock& lock, typename Lock::Handle& h, std::int64_t c, std::int64_t p) {
  lock.lock(h);
  work_loop(c);
  lock.unlock(h);
  work_loop(p);
}

}  // namespace locktp::locks
