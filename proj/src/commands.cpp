#include "locktp/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "locktp/sim.hpp"

namespace locktp::cli {

namespace {

std::int64_t parse_int(std::string_view s, const std::string& context) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad integer '" + std::string(s) + "' in " + context);
  }
  return v;
}

}  // namespace

std::vector<std::int64_t> parse_grid_values(const std::string& spec) {
  if (spec.empty()) throw std::invalid_argument("empty grid specification");
  std::vector<std::int64_t> values;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      values.push_back(parse_int(item, "grid '" + spec + "'"));
      continue;
    }
    std::int64_t step = 1;
    std::string tail = item.substr(dots + 2);
    const auto colon = tail.find(':');
    if (colon != std::string::npos) {
      step = parse_int(tail.substr(colon + 1), "grid '" + spec + "'");
      tail = tail.substr(0, colon);
    }
    const std::int64_t lo = parse_int(item.substr(0, dots), "grid '" + spec + "'");
    const std::int64_t hi = parse_int(tail, "grid '" + spec + "'");
    if (step < 1 || hi < lo) {
      throw std::invalid_argument("bad range '" + item + "' in grid '" + spec + "'");
    }
    for (std::int64_t v = lo; v <= hi; v += step) values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("empty grid specification");
  return values;
}

model::MachineParams parse_machine_file(const std::string& text) {
  model::MachineParams m;
  bool have_alpha = false, have_w = false, have_ri = false, have_x = false;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("machine file line " + std::to_string(line_no) +
                                  ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw std::invalid_argument("machine file line " + std::to_string(line_no) +
                                  ": bad number '" + value + "'");
    }
    if (key == "alpha") {
      m.alpha = v;
      have_alpha = true;
    } else if (key == "w") {
      m.w = v;
      have_w = true;
    } else if (key == "ri") {
      m.r_i = v;
      have_ri = true;
    } else if (key == "x") {
      m.x = v;
      have_x = true;
    } else {
      throw std::invalid_argument("machine file line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
  }
  if (!have_alpha || !have_w || !have_ri) {
    throw std::invalid_argument("machine file must define alpha, w and ri");
  }
  if (!have_x) m.x = m.w;
  m.validate();
  return m;
}

model::MachineParams load_machine_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open machine file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_machine_file(ss.str());
}

std::string machine_file_text(const model::MachineParams& machine) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "alpha=%.17g\nw=%.17g\nri=%.17g\nx=%.17g\n", machine.alpha,
                machine.w, machine.r_i, machine.x);
  return buf;
}

namespace {

template <typename PerPoint>
void for_each_grid_point(const GridSpec& grid, PerPoint&& fn) {
  if (grid.n.empty() || grid.c.empty() || grid.x.empty()) {
    throw std::invalid_argument("grid needs at least one value each for n, c and x");
  }
  for (const std::int64_t n : grid.n) {
    for (const std::int64_t c : grid.c) {
      for (const std::int64_t x : grid.x) {
        if (n < 1 || n > (1 << 20)) {
          throw std::invalid_argument("grid: n=" + std::to_string(n) + " out of range");
        }
        if (x < 0) throw std::invalid_argument("grid: x must be non-negative");
        const model::WorkloadParams wl{static_cast<int>(n), c, x * c};
        wl.validate();
        fn(wl, x);
      }
    }
  }
}

}  // namespace

std::vector<CsvRow> predict_rows(const model::MachineParams& machine, const GridSpec& grid,
                                 PredictModel which) {
  std::vector<CsvRow> rows;
  for_each_grid_point(grid, [&](const model::WorkloadParams& wl, std::int64_t) {
    if (which == PredictModel::Clh || which == PredictModel::Both) {
      rows.push_back(row_from_prediction(wl, model::predict_clh(machine, wl)));
    }
    if (which == PredictModel::Queue || which == PredictModel::Both) {
      rows.push_back(row_from_prediction(wl, model::predict_queue_model(machine.alpha, wl)));
    }
  });
  return rows;
}

std::vector<CsvRow> simulate_rows(const model::MachineParams& machine, const GridSpec& grid,
                                  const SimulateOptions& opts) {
  std::vector<CsvRow> rows;
  for_each_grid_point(grid, [&](const model::WorkloadParams& wl, std::int64_t) {
    sim::SimConfig cfg{machine, wl, opts.warmup_ops, opts.measure_ops};
    rows.push_back(row_from_sim(machine, wl, sim::simulate(cfg)));
  });
  return rows;
}

std::vector<CsvRow> bench_rows(harness::BenchMachine& machine, const GridSpec& grid,
                               const BenchOptions& opts, std::ostream& log) {
  std::vector<CsvRow> rows;
  std::int64_t logged_n = -1;
  for_each_grid_point(grid, [&](const model::WorkloadParams& wl, std::int64_t x) {
    harness::BenchSetting setting{opts.lock, wl.n, wl.c, x, opts.duration_s};
    const auto rec = machine.run_bench(setting);
    if (wl.n != logged_n && !rec.cpus.empty()) {
      logged_n = wl.n;
      log << "# bench n=" << wl.n << " pinned cpus:";
      for (const int cpu : rec.cpus) log << ' ' << cpu;
      log << '\n';
    }
    rows.push_back(row_from_bench(rec));
  });
  return rows;
}

namespace {

using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t>;

std::string key_str(const Key& k) {
  std::ostringstream ss;
  ss << "(n=" << std::get<0>(k) << ",c=" << std::get<1>(k) << ",p=" << std::get<2>(k) << ')';
  return ss.str();
}

std::map<Key, const CsvRow*> index_rows(const std::vector<CsvRow>& rows, const char* side) {
  std::map<Key, const CsvRow*> index;
  for (const auto& row : rows) {
    if (!row.n || !row.c || !row.p || !row.throughput) {
      throw std::invalid_argument(std::string(side) +
                                  " table: rows need n, c, p and throughput to be compared");
    }
    const Key key{*row.n, *row.c, *row.p};
    if (!index.emplace(key, &row).second) {
      throw std::invalid_argument(std::string(side) + " table: duplicate key " + key_str(key));
    }
  }
  return index;
}

}  // namespace

CompareReport compare_tables(const std::vector<CsvRow>& predicted,
                             const std::vector<CsvRow>& measured,
                             const std::optional<model::MachineParams>& machine) {
  const auto pred_index = index_rows(predicted, "predicted");
  const auto meas_index = index_rows(measured, "measured");

  std::vector<std::string> unmatched;
  for (const auto& [key, row] : pred_index) {
    if (!meas_index.count(key)) unmatched.push_back("measured side missing " + key_str(key));
  }
  for (const auto& [key, row] : meas_index) {
    if (!pred_index.count(key)) unmatched.push_back("predicted side missing " + key_str(key));
  }
  if (!unmatched.empty()) {
    std::ostringstream ss;
    ss << "grids do not match:";
    for (const auto& miss : unmatched) ss << "\n  " << miss;
    throw std::invalid_argument(ss.str());
  }

  CompareReport report;
  double err_sum = 0.0;
  for (const auto& [key, prow] : pred_index) {
    const CsvRow* mrow = meas_index.at(key);
    ComparisonRow out;
    out.n = std::get<0>(key);
    out.c = std::get<1>(key);
    out.p = std::get<2>(key);
    out.x = static_cast<double>(out.p) / static_cast<double>(out.c);
    out.predicted = *prow->throughput;
    out.actual = *mrow->throughput;
    if (!(out.predicted > 0.0)) {
      throw std::invalid_argument("relative error undefined: predicted throughput <= 0 at " +
                                  key_str(key));
    }
    out.rel_err = std::abs(out.actual - out.predicted) / out.predicted;
    err_sum += out.rel_err;
    report.max_rel_err = std::max(report.max_rel_err, out.rel_err);
    report.rows.push_back(out);
  }
  report.mean_rel_err = report.rows.empty() ? 0.0 : err_sum / static_cast<double>(report.rows.size());

  // Knee per (n, c): analytic location from the machine constants plus the
  // first unsaturated x observed in the predicted table.
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<const CsvRow*>> by_nc;
  for (const auto& [key, prow] : pred_index) {
    by_nc[{std::get<0>(key), std::get<1>(key)}].push_back(prow);
  }
  for (auto& [nc, rows] : by_nc) {
    KneeReport knee;
    knee.n = nc.first;
    knee.c = nc.second;
    if (machine) {
      knee.analytic_x =
          model::knee_multiplier(*machine, static_cast<int>(nc.first), nc.second);
    }
    std::sort(rows.begin(), rows.end(),
              [](const CsvRow* a, const CsvRow* b) { return *a->x < *b->x; });
    bool seen_saturated = false;
    for (const CsvRow* row : rows) {
      if (row->regime == "saturated") seen_saturated = true;
      if (row->regime == "unsaturated" && seen_saturated) {
        knee.grid_flip_x = *row->x;
        break;
      }
    }
    report.knees.push_back(knee);
  }
  return report;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = "n,c,p,x,predicted,actual,rel_err\n";
  for (const auto& row : rows) {
    out += std::to_string(row.n) + ',' + std::to_string(row.c) + ',' + std::to_string(row.p) +
           ',' + format_g6(row.x) + ',' + format_g6(row.predicted) + ',' +
           format_g6(row.actual) + ',' + format_g6(row.rel_err) + '\n';
  }
  return out;
}

std::string summary_text(const CompareReport& report) {
  std::ostringstream out;
  out << "rows=" << report.rows.size() << " max_rel_err=" << format_g6(report.max_rel_err)
      << " mean_rel_err=" << format_g6(report.mean_rel_err) << '\n';
  for (const auto& knee : report.knees) {
    out << "knee n=" << knee.n << " c=" << knee.c;
    if (knee.analytic_x) out << " x_analytic=" << format_g6(*knee.analytic_x);
    if (knee.grid_flip_x) out << " x_grid_flip=" << format_g6(*knee.grid_flip_x);
    out << '\n';
  }
  return out.str();
}

}  // namespace locktp::cli
