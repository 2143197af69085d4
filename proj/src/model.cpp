#include "locktp/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace locktp::model {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void MachineParams::validate() const {
  require(alpha > 0.0, "machine: alpha must be positive");
  require(w > 0.0, "machine: w must be positive");
  require(r_i > 0.0, "machine: r_i must be positive");
  require(x >= w, "machine: x must be at least w");
}

void WorkloadParams::validate() const {
  require(n >= 1, "workload: n must be at least 1");
  require(c >= 1, "workload: c must be at least 1");
  require(p >= 0, "workload: p must be non-negative");
}

const char* to_string(Regime r) {
  return r == Regime::Saturated ? "saturated" : "unsaturated";
}

const char* to_string(ModelId m) {
  return m == ModelId::ClhAnalytic ? "predict-clh" : "predict-queue";
}

namespace {

void check_predict_args(const MachineParams& m, const WorkloadParams& wl) {
  require(m.alpha > 0.0 && m.w >= 0.0 && m.r_i >= 0.0,
          "machine: alpha must be positive, w and r_i non-negative");
  wl.validate();
}

}  // namespace

double handoff_cost(const MachineParams& m, std::int64_t c) {
  return static_cast<double>(c) + m.r_i + m.w;
}

Regime classify_regime(const MachineParams& m, const WorkloadParams& wl) {
  check_predict_args(m, wl);
  const double par = static_cast<double>(wl.p) + 2.0 * m.w;
  const double bound = (wl.n - 1.0) * handoff_cost(m, wl.c);
  return par <= bound ? Regime::Saturated : Regime::Unsaturated;
}

double clh_saturated_throughput(const MachineParams& m, const WorkloadParams& wl) {
  check_predict_args(m, wl);
  return m.alpha / handoff_cost(m, wl.c);
}

double clh_unsaturated_throughput(const MachineParams& m, const WorkloadParams& wl) {
  check_predict_args(m, wl);
  const double par = static_cast<double>(wl.p) + 2.0 * m.w;
  // Written as alpha over the per-process cycle time so that at the regime
  // boundary, where par + handoff == n * handoff, this reduces to the exact
  // same division the saturated branch performs.
  return m.alpha / ((par + handoff_cost(m, wl.c)) / wl.n);
}

Prediction predict_clh(const MachineParams& m, const WorkloadParams& wl) {
  const Regime regime = classify_regime(m, wl);
  const double thr = regime == Regime::Saturated
                         ? clh_saturated_throughput(m, wl)
                         : clh_unsaturated_throughput(m, wl);
  return {thr, regime, ModelId::ClhAnalytic};
}

Prediction predict_queue_model(double alpha, const WorkloadParams& wl) {
  require(alpha > 0.0, "queue model: alpha must be positive");
  wl.validate();
  const double ratio = static_cast<double>(wl.p) / static_cast<double>(wl.c);
  const double busy = std::max(static_cast<double>(wl.n) - ratio, 1.0);
  const double denom = busy * static_cast<double>(wl.c) + static_cast<double>(wl.p);
  const double thr = alpha / (denom / wl.n);
  const Regime regime = (static_cast<std::int64_t>(wl.n) - 1) * wl.c >= wl.p
                            ? Regime::Saturated
                            : Regime::Unsaturated;
  return {thr, regime, ModelId::QueueModel};
}

double knee_multiplier(const MachineParams& m, int n, std::int64_t c) {
  require(m.w >= 0.0 && m.r_i >= 0.0, "machine: w and r_i must be non-negative");
  require(n >= 1 && c >= 1, "knee: n and c must be at least 1");
  return ((n - 1.0) * handoff_cost(m, c) - 2.0 * m.w) / static_cast<double>(c);
}

}  // namespace locktp::model
