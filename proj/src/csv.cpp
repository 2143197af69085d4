#include "locktp/csv.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace locktp::cli {

namespace {

const std::array<std::string_view, 4> kSources = {"predict-clh", "predict-queue", "sim", "bench"};
const std::array<std::string_view, 3> kLocks = {"", "clh", "spin"};
const std::array<std::string_view, 3> kRegimes = {"", "saturated", "unsaturated"};

template <std::size_t N>
bool one_of(std::string_view v, const std::array<std::string_view, N>& set) {
  for (const auto& s : set) {
    if (v == s) return true;
  }
  return false;
}

std::string format_i64(std::optional<std::int64_t> v) {
  return v ? std::to_string(*v) : std::string();
}

std::string format_opt(std::optional<double> v) { return v ? format_g6(*v) : std::string(); }

std::optional<std::int64_t> parse_i64(std::string_view field, int line, const char* name) {
  if (field.empty()) return std::nullopt;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw CsvError(line, std::string("bad integer in column '") + name + "': '" +
                             std::string(field) + "'");
  }
  return v;
}

std::optional<double> parse_f64(std::string_view field, int line, const char* name) {
  if (field.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw CsvError(line, std::string("bad number in column '") + name + "': '" +
                             std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string to_csv_line(const CsvRow& row) {
  std::string out;
  out += row.source;
  out += ',';
  out += row.lock;
  out += ',';
  out += format_i64(row.n);
  out += ',';
  out += format_i64(row.c);
  out += ',';
  out += format_i64(row.p);
  out += ',';
  out += format_opt(row.x);
  out += ',';
  out += format_opt(row.duration_s);
  out += ',';
  out += format_i64(row.ops);
  out += ',';
  out += format_opt(row.throughput);
  out += ',';
  out += row.regime;
  return out;
}

std::string to_csv(const std::vector<CsvRow>& rows) {
  std::string out{kCsvHeader};
  out += '\n';
  for (const auto& row : rows) {
    out += to_csv_line(row);
    out += '\n';
  }
  return out;
}

std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    ++line_no;

    if (line_no == 1) {
      if (line != kCsvHeader) {
        throw CsvError(1, std::string("expected header '") + kCsvHeader + "'");
      }
      continue;
    }
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (fields.size() != 10) {
      throw CsvError(line_no,
                     "expected 10 columns, got " + std::to_string(fields.size()));
    }

    CsvRow row;
    row.source = std::string(fields[0]);
    row.lock = std::string(fields[1]);
    if (!one_of(fields[0], kSources)) {
      throw CsvError(line_no, "unknown source '" + row.source + "'");
    }
    if (!one_of(fields[1], kLocks)) {
      throw CsvError(line_no, "unknown lock '" + row.lock + "'");
    }
    row.n = parse_i64(fields[2], line_no, "n");
    row.c = parse_i64(fields[3], line_no, "c");
    row.p = parse_i64(fields[4], line_no, "p");
    row.x = parse_f64(fields[5], line_no, "x");
    row.duration_s = parse_f64(fields[6], line_no, "duration_s");
    row.ops = parse_i64(fields[7], line_no, "ops");
    row.throughput = parse_f64(fields[8], line_no, "throughput");
    row.regime = std::string(fields[9]);
    if (!one_of(fields[9], kRegimes)) {
      throw CsvError(line_no, "unknown regime '" + row.regime + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CsvRow> read_csv_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

CsvRow row_from_prediction(const model::WorkloadParams& wl, const model::Prediction& pred) {
  CsvRow row;
  row.source = model::to_string(pred.model_id);
  row.lock = pred.model_id == model::ModelId::ClhAnalytic ? "clh" : "";
  row.n = wl.n;
  row.c = wl.c;
  row.p = wl.p;
  row.x = static_cast<double>(wl.p) / static_cast<double>(wl.c);
  row.throughput = pred.throughput;
  row.regime = model::to_string(pred.regime);
  return row;
}

CsvRow row_from_sim(const model::MachineParams& machine, const model::WorkloadParams& wl,
                    const sim::SimResult& result) {
  CsvRow row;
  row.source = "sim";
  row.lock = "clh";
  row.n = wl.n;
  row.c = wl.c;
  row.p = wl.p;
  row.x = static_cast<double>(wl.p) / static_cast<double>(wl.c);
  row.duration_s = static_cast<double>(result.ticks) / machine.alpha;
  row.ops = result.total_ops;
  row.throughput = result.throughput;
  row.regime = model::to_string(result.observed_regime);
  return row;
}

CsvRow row_from_bench(const harness::MeasurementRecord& rec) {
  CsvRow row;
  row.source = "bench";
  row.lock = harness::to_string(rec.setting.lock);
  row.n = rec.setting.n;
  row.c = rec.setting.c;
  row.p = rec.setting.parallel();
  row.x = static_cast<double>(rec.setting.x);
  row.duration_s = rec.elapsed_s;
  row.ops = rec.total_ops;
  row.throughput = rec.throughput;
  return row;
}

}  // namespace locktp::cli
