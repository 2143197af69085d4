#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "locktp/harness.hpp"
#include "locktp/model.hpp"
#include "locktp/sim.hpp"

namespace locktp::cli {

/// Column order of every table the tool reads or writes. Fields that do
/// not apply to a source are left empty. Throughput and the other real
/// numbers carry 6 significant digits, so emit -> parse -> emit is
/// byte-identical.
inline constexpr const char* kCsvHeader = "source,lock,n,c,p,x,duration_s,ops,throughput,regime";

struct CsvRow {
  std::string source;  // predict-clh | predict-queue | sim | bench
  std::string lock;    // clh | spin | empty
  std::optional<std::int64_t> n;
  std::optional<std::int64_t> c;
  std::optional<std::int64_t> p;
  std::optional<double> x;
  std::optional<double> duration_s;
  std::optional<std::int64_t> ops;
  std::optional<double> throughput;
  std::string regime;  // saturated | unsaturated | empty
};

class CsvError : public std::runtime_error {
 public:
  CsvError(int line, const std::string& what)
      : std::runtime_error("csv line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// 6 significant digits, the serialization used for every real field.
std::string format_g6(double v);

std::string to_csv_line(const CsvRow& row);
std::string to_csv(const std::vector<CsvRow>& rows);  // header + rows + trailing \n
std::vector<CsvRow> parse_csv(std::string_view text);  // throws CsvError

std::vector<CsvRow> read_csv_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

CsvRow row_from_prediction(const model::WorkloadParams& wl, const model::Prediction& pred);
CsvRow row_from_sim(const model::MachineParams& machine, const model::WorkloadParams& wl,
                    const sim::SimResult& result);
CsvRow row_from_bench(const harness::MeasurementRecord& rec);

}  // namespace locktp::cli
