#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "locktp/csv.hpp"
#include "locktp/harness.hpp"
#include "locktp/model.hpp"

namespace locktp::cli {

/// Grid value list: "1,5,10", "1..150" (inclusive) or "1..141:10".
std::vector<std::int64_t> parse_grid_values(const std::string& spec);

struct GridSpec {
  std::vector<std::int64_t> n;
  std::vector<std::int64_t> c;
  std::vector<std::int64_t> x;
};

/// key=value calibration file with keys alpha, w, ri and optional x.
model::MachineParams parse_machine_file(const std::string& text);
model::MachineParams load_machine_file(const std::string& path);
std::string machine_file_text(const model::MachineParams& machine);

enum class PredictModel { Clh, Queue, Both };

std::vector<CsvRow> predict_rows(const model::MachineParams& machine, const GridSpec& grid,
                                 PredictModel which);

struct SimulateOptions {
  std::int64_t warmup_ops = 10;
  std::int64_t measure_ops = 50;
};
std::vector<CsvRow> simulate_rows(const model::MachineParams& machine, const GridSpec& grid,
                                  const SimulateOptions& opts);

struct BenchOptions {
  harness::LockKind lock = harness::LockKind::Clh;
  double duration_s = 10.0;
  std::int64_t spin_yield_threshold = 0;
};
/// log receives one line per distinct n with the pin order used.
std::vector<CsvRow> bench_rows(harness::BenchMachine& machine, const GridSpec& grid,
                               const BenchOptions& opts, std::ostream& log);

struct ComparisonRow {
  std::int64_t n = 0, c = 0, p = 0;
  double x = 0.0;
  double predicted = 0.0;
  double actual = 0.0;
  double rel_err = 0.0;  // |actual - predicted| / predicted
};

struct KneeReport {
  std::int64_t n = 0, c = 0;
  std::optional<double> analytic_x;   // from machine constants, when given
  std::optional<double> grid_flip_x;  // first unsaturated x in the predicted table
};

struct CompareReport {
  std::vector<ComparisonRow> rows;
  double max_rel_err = 0.0;
  double mean_rel_err = 0.0;
  std::vector<KneeReport> knees;
};

/// Joins the predicted table against the measured one on (n, c, p).
/// Throws with the offending keys when the grids do not match.
CompareReport compare_tables(const std::vector<CsvRow>& predicted,
                             const std::vector<CsvRow>& measured,
                             const std::optional<model::MachineParams>& machine);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);
std::string summary_text(const CompareReport& report);

}  // namespace locktp::cli
