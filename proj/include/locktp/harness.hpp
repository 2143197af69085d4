#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "locktp/model.hpp"

namespace locktp::harness {

enum class LockKind { Clh, Spin };

const char* to_string(LockKind kind);
std::optional<LockKind> lock_kind_from_string(std::string_view name);

struct BenchSetting {
  LockKind lock = LockKind::Clh;
  int n = 1;
  std::int64_t c = 1;
  std::int64_t x = 1;  // parallel multiplier, p = x * c
  double duration_s = 10.0;

  std::int64_t parallel() const { return x * c; }
  void validate(int max_threads) const;  // throws std::invalid_argument
};

struct MeasurementRecord {
  BenchSetting setting;
  std::int64_t total_ops = 0;  // F, completed operations in the window
  double elapsed_s = 0.0;
  double throughput = 0.0;  // total_ops / elapsed_s
  std::vector<std::int64_t> per_thread_ops;
  std::vector<int> cpus;  // pin order used; empty on the fake machine
};

struct CalibrationResult {
  model::MachineParams machine;
  double residual = 0.0;  // rms relative error of the fit over the grid
  std::string grid_note;
};

/// Raised when a calibration grid cannot pin down the constants.
class IdentifiabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Something that can run the benchmark workloads. HardwareMachine pins
/// real threads; SimMachine delegates to the discrete-time simulator with
/// injected ground-truth constants and is fully deterministic, which is
/// what the calibration round-trip tests run against.
class BenchMachine {
 public:
  virtual ~BenchMachine() = default;

  virtual MeasurementRecord run_bench(const BenchSetting& setting) = 0;

  /// Calibration workload for alpha: n threads run only the parallel loop
  /// of p units, no lock, no critical section.
  virtual MeasurementRecord run_parallel_only(int n, std::int64_t p, double duration_s) = 0;

  virtual int max_threads() const = 0;
};

class HardwareMachine final : public BenchMachine {
 public:
  struct Options {
    double warmup_s = 1.0;  // excluded from the measurement window
    std::int64_t spin_yield_threshold = 0;
  };

  HardwareMachine() : HardwareMachine(Options{}) {}
  explicit HardwareMachine(Options opts);

  MeasurementRecord run_bench(const BenchSetting& setting) override;
  MeasurementRecord run_parallel_only(int n, std::int64_t p, double duration_s) override;
  int max_threads() const override;

 private:
  template <typename Lock>
  MeasurementRecord run_lock_bench(const BenchSetting& setting, const std::vector<int>& cpus);

  Options opts_;
};

class SimMachine final : public BenchMachine {
 public:
  explicit SimMachine(const model::MachineParams& truth);

  /// Rejects LockKind::Spin: the simulator only models the queue lock.
  MeasurementRecord run_bench(const BenchSetting& setting) override;
  MeasurementRecord run_parallel_only(int n, std::int64_t p, double duration_s) override;
  int max_threads() const override;

 private:
  model::MachineParams truth_;
};

/// alpha = F * p / (n * elapsed), work units per second per process.
/// Throws if the machine completed no operations (a broken opaque sink).
double calibrate_alpha(BenchMachine& machine, int n, std::int64_t p, double duration_s);

/// Two-stage fit of (w, r_i) given alpha. Saturated points only expose the
/// sum s = r_i + w (throughput = alpha / (c + s)); s is fit there by least
/// squares and split using the unsaturated points. Records are classified
/// by the model itself, re-classifying once with the fitted constants.
/// Throws IdentifiabilityError for degenerate grids.
CalibrationResult calibrate_costs(const std::vector<MeasurementRecord>& grid, double alpha);

struct CalibrationOptions {
  int n = 0;  // thread count for the cost grid; 0 = min(8, max_threads)
  std::int64_t alpha_p = 100000;
  double alpha_duration_s = 10.0;
  double point_duration_s = 10.0;
};

/// alpha measurement followed by a small cost grid (three saturated
/// critical-section sizes plus one deep unsaturated point).
CalibrationResult run_full_calibration(BenchMachine& machine, const CalibrationOptions& opts = {});

/// CPU ids to pin n worker threads to, in order. The LOCKTP_CPUS
/// environment variable (comma-separated ids) overrides; otherwise sysfs
/// topology is used to fill one socket's physical cores before its
/// hyperthread siblings and before the next socket, falling back to
/// 0..n-1 when topology is unavailable. Throws when fewer than n CPUs are
/// usable.
std::vector<int> planned_cpu_order(int n);

}  // namespace locktp::harness
