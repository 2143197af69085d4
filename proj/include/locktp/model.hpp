#pragma once

#include <cstdint>

namespace locktp::model {

/// Calibrated machine constants. `alpha` is the rate of one process in
/// work units per second; `w` is the cost of a cache-line write or an
/// uncontended swap, `r_i` the cost of reading an Invalid line, both in
/// work units. `x` bounds a contended swap; it only matters during the
/// startup transient and never enters the steady-state formulas.
struct MachineParams {
  double alpha = 0.0;
  double w = 0.0;
  double r_i = 0.0;
  double x = 0.0;

  /// Checks the calibrated-machine invariant (alpha, w, r_i > 0, x >= w).
  /// Throws std::invalid_argument. The predictors themselves accept
  /// degenerate machines (w == 0, r_i == 0); see predict_queue_model.
  void validate() const;
};

struct WorkloadParams {
  int n = 1;           // processes
  std::int64_t c = 1;  // critical-section size, work units
  std::int64_t p = 0;  // parallel-section size, work units

  void validate() const;
};

enum class Regime { Unsaturated, Saturated };
enum class ModelId { ClhAnalytic, QueueModel };

const char* to_string(Regime r);
const char* to_string(ModelId m);

struct Prediction {
  double throughput = 0.0;  // operations per second
  Regime regime = Regime::Unsaturated;
  ModelId model_id = ModelId::ClhAnalytic;
};

/// Work on the lock handoff path: C + R_I + W.
double handoff_cost(const MachineParams& m, std::int64_t c);

/// Saturated when P + 2W <= (N-1)(C + R_I + W); the tie goes to the
/// saturated side (both branch values coincide there).
Regime classify_regime(const MachineParams& m, const WorkloadParams& wl);

// The two branch expressions are exposed separately so that behaviour at
// the regime boundary can be checked directly; predict_clh dispatches on
// classify_regime.
double clh_saturated_throughput(const MachineParams& m, const WorkloadParams& wl);
double clh_unsaturated_throughput(const MachineParams& m, const WorkloadParams& wl);

/// Piecewise throughput of the CLH-locked operation, ops per second.
Prediction predict_clh(const MachineParams& m, const WorkloadParams& wl);

/// Simplified queue model: alpha*N / (max(N - P/C, 1)*C + P). P/C is real
/// arithmetic, no truncation. Coincides with predict_clh at w = r_i = 0.
Prediction predict_queue_model(double alpha, const WorkloadParams& wl);

/// Parallel-section multiplier x = P/C at which the two regimes meet,
/// i.e. where P + 2W = (N-1)(C + R_I + W). Negative for n == 1: a single
/// process never queues.
double knee_multiplier(const MachineParams& m, int n, std::int64_t c);

}  // namespace locktp::model
