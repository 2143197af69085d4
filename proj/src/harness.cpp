#include "locktp/harness.hpp"

#include <pthread.h>
#include <sched.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "locktp/locks.hpp"
#include "locktp/sim.hpp"

namespace locktp::harness {

using Clock = std::chrono::steady_clock;

const char* to_string(LockKind kind) { return kind == LockKind::Clh ? "clh" : "spin"; }

std::optional<LockKind> lock_kind_from_string(std::string_view name) {
  if (name == "clh") return LockKind::Clh;
  if (name == "spin") return LockKind::Spin;
  return std::nullopt;
}

void BenchSetting::validate(int max_threads) const {
  if (n < 1) throw std::invalid_argument("bench: n must be at least 1");
  if (n > max_threads) {
    throw std::invalid_argument("bench: n exceeds available hardware threads (" +
                                std::to_string(max_threads) + ")");
  }
  if (c < 1) throw std::invalid_argument("bench: c must be at least 1");
  if (x < 0) throw std::invalid_argument("bench: x must be non-negative");
  if (!(duration_s >= 1.0)) {
    throw std::invalid_argument("bench: duration must be at least 1 second");
  }
}

// ---------------------------------------------------------------------------
// CPU pin order

namespace {

std::optional<std::vector<int>> cpus_from_env() {
  const char* env = std::getenv("LOCKTP_CPUS");
  if (env == nullptr || *env == '\0') return std::nullopt;
  std::vector<int> cpus;
  std::stringstream ss{std::string(env)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      cpus.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw std::invalid_argument("LOCKTP_CPUS: bad cpu id '" + item + "'");
    }
  }
  return cpus;
}

std::optional<int> read_topology_id(int cpu, const char* leaf) {
  std::ostringstream path;
  path << "/sys/devices/system/cpu/cpu" << cpu << "/topology/" << leaf;
  std::ifstream f(path.str());
  int v = -1;
  if (f >> v) return v;
  return std::nullopt;
}

}  // namespace

std::vector<int> planned_cpu_order(int n) {
  if (n < 1) throw std::invalid_argument("cpu order: n must be at least 1");
  if (auto env = cpus_from_env()) {
    if (static_cast<int>(env->size()) < n) {
      throw std::invalid_argument("LOCKTP_CPUS lists " + std::to_string(env->size()) +
                                  " cpus, need " + std::to_string(n));
    }
    env->resize(static_cast<std::size_t>(n));
    return *env;
  }

  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < n) {
    throw std::invalid_argument("need " + std::to_string(n) + " hardware threads, have " +
                                std::to_string(hw));
  }

  struct Slot {
    int package, core, cpu;
    int sibling_rank = 0;
  };
  std::vector<Slot> slots;
  bool have_topology = true;
  for (int cpu = 0; cpu < hw; ++cpu) {
    auto pkg = read_topology_id(cpu, "physical_package_id");
    auto core = read_topology_id(cpu, "core_id");
    if (!pkg || !core) {
      have_topology = false;
      break;
    }
    slots.push_back({*pkg, *core, cpu});
  }
  if (!have_topology) {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    return order;
  }

  // Rank hyperthread siblings within each physical core so every core of a
  // socket is used once before its second thread and before the next
  // socket.
  std::map<std::pair<int, int>, int> seen;
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    return std::tie(a.package, a.core, a.cpu) < std::tie(b.package, b.core, b.cpu);
  });
  for (auto& s : slots) s.sibling_rank = seen[{s.package, s.core}]++;
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    return std::tie(a.package, a.sibling_rank, a.core, a.cpu) <
           std::tie(b.package, b.sibling_rank, b.core, b.cpu);
  });

  std::vector<int> order;
  for (int i = 0; i < n; ++i) order.push_back(slots[static_cast<std::size_t>(i)].cpu);
  return order;
}

// ---------------------------------------------------------------------------
// HardwareMachine

namespace {

struct alignas(locks::ClhLock::kCacheLine) PaddedCount {
  std::atomic<std::int64_t> v{0};
};

void pin_thread(std::thread& t, int cpu) {
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(static_cast<unsigned>(cpu), &set);
  const int rc = pthread_setaffinity_np(t.native_handle(), sizeof(set), &set);
  if (rc != 0) {
    throw std::runtime_error("failed to pin thread to cpu " + std::to_string(cpu) +
                             " (errno " + std::to_string(rc) +
                             "); unpinned runs would break the cost model");
  }
}

/// Spawns n pinned threads each looping op() until stopped; measures the
/// window after warmup_s. Returns (total, elapsed, per-thread counts).
template <typename MakeOp>
std::tuple<std::int64_t, double, std::vector<std::int64_t>> run_measured(
    int n, const std::vector<int>& cpus, double warmup_s, double duration_s, MakeOp make_op) {
  std::vector<PaddedCount> counts(static_cast<std::size_t>(n));
  std::atomic<bool> go{false};
  std::atomic<bool> stop{false};
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n));

  for (int i = 0; i < n; ++i) {
    threads.emplace_back([&, i] {
      auto op = make_op(i);
      std::int64_t local = 0;
      while (!go.load(std::memory_order_acquire)) std::this_thread::yield();
      auto& slot = counts[static_cast<std::size_t>(i)].v;
      while (!stop.load(std::memory_order_relaxed)) {
        op();
        slot.store(++local, std::memory_order_relaxed);
      }
    });
  }

  try {
    for (int i = 0; i < n; ++i) pin_thread(threads[static_cast<std::size_t>(i)], cpus[static_cast<std::size_t>(i)]);
  } catch (...) {
    go.store(true, std::memory_order_release);
    stop.store(true, std::memory_order_relaxed);
    for (auto& t : threads) t.join();
    throw;
  }

  go.store(true, std::memory_order_release);
  std::this_thread::sleep_for(std::chrono::duration<double>(warmup_s));

  std::vector<std::int64_t> before(static_cast<std::size_t>(n));
  const auto t0 = Clock::now();
  for (int i = 0; i < n; ++i) {
    before[static_cast<std::size_t>(i)] =
        counts[static_cast<std::size_t>(i)].v.load(std::memory_order_relaxed);
  }
  std::this_thread::sleep_for(std::chrono::duration<double>(duration_s));
  std::vector<std::int64_t> after(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    after[static_cast<std::size_t>(i)] =
        counts[static_cast<std::size_t>(i)].v.load(std::memory_order_relaxed);
  }
  const auto t1 = Clock::now();
  stop.store(true, std::memory_order_relaxed);
  for (auto& t : threads) t.join();

  std::vector<std::int64_t> per_thread(static_cast<std::size_t>(n));
  std::int64_t total = 0;
  for (int i = 0; i < n; ++i) {
    per_thread[static_cast<std::size_t>(i)] =
        after[static_cast<std::size_t>(i)] - before[static_cast<std::size_t>(i)];
    total += per_thread[static_cast<std::size_t>(i)];
  }
  const double elapsed = std::chrono::duration<double>(t1 - t0).count();
  return {total, elapsed, per_thread};
}

}  // namespace

HardwareMachine::HardwareMachine(Options opts) : opts_(opts) {}

int HardwareMachine::max_threads() const {
  return static_cast<int>(std::thread::hardware_concurrency());
}

template <typename Lock>
MeasurementRecord HardwareMachine::run_lock_bench(const BenchSetting& setting,
                                                  const std::vector<int>& cpus) {
  Lock lock(opts_.spin_yield_threshold);
  const std::int64_t c = setting.c;
  const std::int64_t p = setting.parallel();
  auto [total, elapsed, per_thread] =
      run_measured(setting.n, cpus, opts_.warmup_s, setting.duration_s, [&](int) {
        return [&lock, h = typename Lock::Handle(lock), c, p]() mutable {
          locks::run_operation(lock, h, c, p);
        };
      });

  MeasurementRecord rec;
  rec.setting = setting;
  rec.total_ops = total;
  rec.elapsed_s = elapsed;
  rec.throughput = static_cast<double>(total) / elapsed;
  rec.per_thread_ops = std::move(per_thread);
  rec.cpus = cpus;
  return rec;
}

MeasurementRecord HardwareMachine::run_bench(const BenchSetting& setting) {
  setting.validate(max_threads());
  const auto cpus = planned_cpu_order(setting.n);
  switch (setting.lock) {
    case LockKind::Clh:
      return run_lock_bench<locks::ClhLock>(setting, cpus);
    case LockKind::Spin:
      return run_lock_bench<locks::SpinLock>(setting, cpus);
  }
  throw std::logic_error("unreachable lock kind");
}

MeasurementRecord HardwareMachine::run_parallel_only(int n, std::int64_t p, double duration_s) {
  if (n < 1 || n > max_threads()) {
    throw std::invalid_argument("calibration: n must be in [1, hardware threads]");
  }
  if (p < 1) throw std::invalid_argument("calibration: p must be at least 1");
  if (!(duration_s > 0.0)) throw std::invalid_argument("calibration: duration must be positive");

  const auto cpus = planned_cpu_order(n);
  auto [total, elapsed, per_thread] =
      run_measured(n, cpus, opts_.warmup_s, duration_s, [&](int) {
        return [p] { locks::work_loop(p); };
      });

  MeasurementRecord rec;
  rec.setting = BenchSetting{LockKind::Clh, n, 1, 0, duration_s};
  rec.setting.c = 1;
  rec.setting.x = 0;
  rec.total_ops = total;
  rec.elapsed_s = elapsed;
  rec.throughput = static_cast<double>(total) / elapsed;
  rec.per_thread_ops = std::move(per_thread);
  rec.cpus = cpus;
  return rec;
}

// ---------------------------------------------------------------------------
// SimMachine

SimMachine::SimMachine(const model::MachineParams& truth) : truth_(truth) {
  truth_.validate();
}

int SimMachine::max_threads() const { return 1 << 16; }

MeasurementRecord SimMachine::run_bench(const BenchSetting& setting) {
  setting.validate(max_threads());
  if (setting.lock == LockKind::Spin) {
    throw std::invalid_argument("the fake machine has no simulator model for the spin lock");
  }

  sim::SimConfig cfg;
  cfg.machine = truth_;
  cfg.workload = {setting.n, setting.c, setting.parallel()};
  const sim::SimResult steady = sim::simulate(cfg);

  MeasurementRecord rec;
  rec.setting = setting;
  rec.total_ops = std::llround(steady.throughput * setting.duration_s);
  rec.elapsed_s = setting.duration_s;
  rec.throughput = static_cast<double>(rec.total_ops) / rec.elapsed_s;
  rec.per_thread_ops.assign(static_cast<std::size_t>(setting.n),
                            rec.total_ops / setting.n);
  for (std::int64_t i = 0; i < rec.total_ops % setting.n; ++i) {
    ++rec.per_thread_ops[static_cast<std::size_t>(i)];
  }
  return rec;
}

MeasurementRecord SimMachine::run_parallel_only(int n, std::int64_t p, double duration_s) {
  if (n < 1) throw std::invalid_argument("calibration: n must be at least 1");
  if (p < 1) throw std::invalid_argument("calibration: p must be at least 1");
  if (!(duration_s > 0.0)) throw std::invalid_argument("calibration: duration must be positive");

  // Under the uniform scheduler each process runs alpha ticks per second
  // and completes one operation every p ticks.
  const auto ticks = static_cast<std::int64_t>(duration_s * truth_.alpha);
  const std::int64_t ops_each = ticks / p;

  MeasurementRecord rec;
  rec.setting = BenchSetting{LockKind::Clh, n, 1, 0, duration_s};
  rec.total_ops = ops_each * n;
  rec.elapsed_s = duration_s;
  rec.throughput = static_cast<double>(rec.total_ops) / duration_s;
  rec.per_thread_ops.assign(static_cast<std::size_t>(n), ops_each);
  return rec;
}

// ---------------------------------------------------------------------------
// Calibration

double calibrate_alpha(BenchMachine& machine, int n, std::int64_t p, double duration_s) {
  const MeasurementRecord rec = machine.run_parallel_only(n, p, duration_s);
  if (rec.total_ops <= 0) {
    throw std::runtime_error(
        "calibration: no operations completed; the work loop was optimized away");
  }
  return static_cast<double>(rec.total_ops) * static_cast<double>(p) /
         (static_cast<double>(n) * rec.elapsed_s);
}

CalibrationResult calibrate_costs(const std::vector<MeasurementRecord>& grid, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("calibration: alpha must be positive");
  if (grid.empty()) throw IdentifiabilityError("calibration: empty measurement grid");
  for (const auto& rec : grid) {
    if (!(rec.throughput > 0.0)) {
      throw std::invalid_argument("calibration: grid record with non-positive throughput");
    }
  }

  double w = 0.0, ri = 0.0;
  std::vector<char> saturated(grid.size(), 0);
  std::size_t n_sat = 0, n_unsat = 0;

  for (int pass = 0; pass < 4; ++pass) {
    std::vector<char> cls(grid.size(), 0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& s = grid[i].setting;
      const model::MachineParams m{alpha, w, ri, std::max(w, 1.0)};
      const model::WorkloadParams wl{s.n, s.c, s.parallel()};
      cls[i] = model::classify_regime(m, wl) == model::Regime::Saturated ? 1 : 0;
    }

    std::set<std::int64_t> sat_cs;
    double s_sum = 0.0;
    n_sat = n_unsat = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!cls[i]) continue;
      ++n_sat;
      sat_cs.insert(grid[i].setting.c);
      s_sum += alpha / grid[i].throughput - static_cast<double>(grid[i].setting.c);
    }
    if (sat_cs.size() < 2) {
      throw IdentifiabilityError(
          "calibration: need saturated-regime measurements at >= 2 distinct c values "
          "to fit r_i + w");
    }
    const double s_fit = s_sum / static_cast<double>(n_sat);

    double w_sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (cls[i]) continue;
      ++n_unsat;
      const auto& s = grid[i].setting;
      const double cycle = alpha * static_cast<double>(s.n) / grid[i].throughput;
      w_sum += (cycle - static_cast<double>(s.parallel()) - static_cast<double>(s.c) - s_fit) / 2.0;
    }
    if (n_unsat == 0) {
      throw IdentifiabilityError(
          "calibration: no unsaturated-regime point in the grid; cannot split w from r_i");
    }

    const double w_fit = w_sum / static_cast<double>(n_unsat);
    const double ri_fit = s_fit - w_fit;
    if (!(w_fit > 0.0) || !(ri_fit > 0.0)) {
      throw IdentifiabilityError(
          "calibration: fit produced non-positive cost constants; the grid is "
          "degenerate or too noisy");
    }
    w = w_fit;
    ri = ri_fit;
    if (cls == saturated) break;
    saturated = cls;
  }

  CalibrationResult result;
  // x is not identifiable from steady-state data; record the lower bound.
  result.machine = {alpha, w, ri, w};
  result.machine.validate();

  double sq = 0.0;
  for (const auto& rec : grid) {
    const auto& s = rec.setting;
    const double pred =
        model::predict_clh(result.machine, {s.n, s.c, s.parallel()}).throughput;
    const double rel = (pred - rec.throughput) / rec.throughput;
    sq += rel * rel;
  }
  result.residual = std::sqrt(sq / static_cast<double>(grid.size()));

  std::ostringstream note;
  note << "fit over " << n_sat << " saturated + " << n_unsat << " unsaturated points";
  result.grid_note = note.str();
  return result;
}

CalibrationResult run_full_calibration(BenchMachine& machine, const CalibrationOptions& opts) {
  int n = opts.n;
  if (n == 0) n = std::min(8, machine.max_threads());
  if (n < 2) {
    throw std::invalid_argument("calibration: need at least 2 threads for the cost grid");
  }

  const double alpha = calibrate_alpha(machine, 1, opts.alpha_p, opts.alpha_duration_s);

  std::vector<MeasurementRecord> grid;
  for (std::int64_t c : {100, 500, 1000}) {
    grid.push_back(machine.run_bench({LockKind::Clh, n, c, 1, opts.point_duration_s}));
  }
  // One deep unsaturated point to split w from r_i.
  grid.push_back(machine.run_bench({LockKind::Clh, n, 100, 150, opts.point_duration_s}));

  CalibrationResult result = calibrate_costs(grid, alpha);
  result.grid_note += ", n=" + std::to_string(n);
  return result;
}

}  // namespace locktp::harness
