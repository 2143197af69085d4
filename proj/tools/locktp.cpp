// locktp - predicts the throughput of coarse-grained lock-based operations
// from calibrated machine constants, validates the prediction against a
// deterministic discrete-time simulator, and measures it on real hardware
// with pinned threads.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "locktp/commands.hpp"
#include "locktp/csv.hpp"
#include "locktp/harness.hpp"
#include "locktp/model.hpp"
#include "locktp/plot.hpp"

namespace {

using namespace locktp;

struct MachineFlags {
  std::string file;
  double alpha = 0.0, w = 0.0, ri = 0.0;

  void add_to(CLI::App* cmd, bool ri_only_ok = false) {
    cmd->add_option("--machine", file, "calibration file (key=value: alpha, w, ri, x)");
    cmd->add_option("--alpha", alpha, "work units per second per process");
    cmd->add_option("--w", w, "write / uncontended swap cost, work units");
    cmd->add_option("--ri", ri, "invalid-line read cost, work units");
    (void)ri_only_ok;
  }

  std::optional<model::MachineParams> get() const {
    if (!file.empty()) return cli::load_machine_file(file);
    if (alpha > 0.0 || w > 0.0 || ri > 0.0) {
      model::MachineParams m{alpha, w, ri, w};
      m.validate();
      return m;
    }
    return std::nullopt;
  }

  model::MachineParams require() const {
    auto m = get();
    if (!m) {
      throw CLI::ValidationError(
          "machine parameters required: pass --machine FILE or --alpha/--w/--ri");
    }
    return *m;
  }
};

struct GridFlags {
  std::string n = "5,10,20,30,39";
  std::string c = "100,500,1000,5000,10000";
  std::string x = "1..150";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--n", n, "process counts (list/range), default " + n);
    cmd->add_option("--c", c, "critical-section sizes, default " + c);
    cmd->add_option("--x", x, "parallel multipliers p = x*c, default " + x);
  }

  cli::GridSpec parse() const {
    return {cli::parse_grid_values(n), cli::parse_grid_values(c), cli::parse_grid_values(x)};
  }
};

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    cli::write_text_file(out_path, text);
  }
}

std::optional<model::MachineParams> parse_fake_spec(const std::string& spec) {
  if (spec.empty()) return std::nullopt;
  model::MachineParams m;
  double x = 0.0;
  const int got = std::sscanf(spec.c_str(), "%lf,%lf,%lf,%lf", &m.alpha, &m.w, &m.r_i, &x);
  if (got < 3) {
    throw CLI::ValidationError("--fake expects \"alpha,w,ri[,x]\"");
  }
  m.x = got >= 4 ? x : m.w;
  m.validate();
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coarse-grained lock throughput toolkit"};
  app.require_subcommand(1);
  std::string out_path;

  // predict
  auto* predict = app.add_subcommand("predict", "closed-form throughput over a grid");
  MachineFlags predict_machine;
  GridFlags predict_grid;
  std::string model_name = "clh";
  predict_machine.add_to(predict);
  predict_grid.add_to(predict);
  predict->add_option("--model", model_name, "clh | queue | both (default clh)");
  predict->add_option("--out", out_path, "output path (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "discrete-time simulator over a grid");
  MachineFlags sim_machine;
  GridFlags sim_grid;
  cli::SimulateOptions sim_opts;
  sim_machine.add_to(simulate);
  sim_grid.add_to(simulate);
  simulate->add_option("--warmup", sim_opts.warmup_ops, "per-process ops discarded (default 10)");
  simulate->add_option("--measure", sim_opts.measure_ops, "per-process ops counted (default 50)");
  simulate->add_option("--out", out_path, "output path (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "hardware benchmark with pinned threads");
  GridFlags bench_grid;
  bench_grid.n.clear();
  bench_grid.c.clear();
  bench_grid.x.clear();
  std::string lock_name = "clh";
  cli::BenchOptions bench_opts;
  bench->add_option("--lock", lock_name, "clh | spin (default clh)");
  bench->add_option("--n", bench_grid.n, "thread counts (list/range)")->required();
  bench->add_option("--c", bench_grid.c, "critical-section sizes")->required();
  bench->add_option("--x", bench_grid.x, "parallel multipliers p = x*c")->required();
  bench->add_option("--duration", bench_opts.duration_s, "seconds per point (default 10)");
  bench->add_option("--spin-yield", bench_opts.spin_yield_threshold,
                    "yield after this many failed spins (default 0 = never)");
  bench->add_option("--out", out_path, "output path (default stdout)");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "measure alpha, w and ri on this machine");
  harness::CalibrationOptions cal_opts;
  cal_opts.alpha_duration_s = 10.0;
  cal_opts.point_duration_s = 10.0;
  double cal_duration = 10.0;
  std::string fake_spec;
  calibrate->add_option("--duration", cal_duration, "seconds per measurement (default 10)");
  calibrate->add_option("--n", cal_opts.n, "threads for the cost grid (default min(8, hw))");
  calibrate->add_option("--alpha-p", cal_opts.alpha_p,
                        "parallel-loop size for the alpha run (default 100000)");
  calibrate->add_option("--fake", fake_spec,
                        "run against the simulator-backed machine \"alpha,w,ri[,x]\"");
  calibrate->add_option("--out", out_path, "write the calibration file here");

  // compare
  auto* compare = app.add_subcommand("compare", "join two tables and report relative error");
  MachineFlags cmp_machine;
  std::string file_a, file_b;
  compare->add_option("predicted", file_a, "predicted-side csv")->required();
  compare->add_option("measured", file_b, "measured-side csv")->required();
  cmp_machine.add_to(compare);
  compare->add_option("--out", out_path, "output path (default stdout)");

  // plot
  auto* plot = app.add_subcommand("plot", "emit svg or gnuplot data from a table");
  std::string plot_in, plot_out;
  plot->add_option("input", plot_in, "input csv")->required();
  plot->add_option("--out", plot_out, "output path; .svg for svg, anything else for gnuplot data")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (predict->parsed()) {
      cli::PredictModel which;
      if (model_name == "clh") {
        which = cli::PredictModel::Clh;
      } else if (model_name == "queue") {
        which = cli::PredictModel::Queue;
      } else if (model_name == "both") {
        which = cli::PredictModel::Both;
      } else {
        throw std::invalid_argument("--model must be clh, queue or both");
      }
      const auto rows = cli::predict_rows(predict_machine.require(), predict_grid.parse(), which);
      emit(cli::to_csv(rows), out_path);
    } else if (simulate->parsed()) {
      const auto rows = cli::simulate_rows(sim_machine.require(), sim_grid.parse(), sim_opts);
      emit(cli::to_csv(rows), out_path);
    } else if (bench->parsed()) {
      const auto kind = harness::lock_kind_from_string(lock_name);
      if (!kind) throw std::invalid_argument("--lock must be clh or spin");
      bench_opts.lock = *kind;
      harness::HardwareMachine machine({1.0, bench_opts.spin_yield_threshold});
      const auto rows = cli::bench_rows(machine, bench_grid.parse(), bench_opts, std::cerr);
      emit(cli::to_csv(rows), out_path);
    } else if (calibrate->parsed()) {
      cal_opts.alpha_duration_s = cal_duration;
      cal_opts.point_duration_s = cal_duration;
      std::unique_ptr<harness::BenchMachine> machine;
      if (const auto fake = parse_fake_spec(fake_spec)) {
        machine = std::make_unique<harness::SimMachine>(*fake);
      } else {
        machine = std::make_unique<harness::HardwareMachine>();
      }
      const auto result = harness::run_full_calibration(*machine, cal_opts);
      std::cerr << "# calibration: " << result.grid_note
                << ", rms residual=" << cli::format_g6(result.residual) << '\n';
      emit(cli::machine_file_text(result.machine), out_path);
    } else if (compare->parsed()) {
      const auto report = cli::compare_tables(cli::read_csv_file(file_a),
                                              cli::read_csv_file(file_b), cmp_machine.get());
      std::cerr << cli::summary_text(report);
      emit(cli::comparison_csv(report.rows), out_path);
    } else if (plot->parsed()) {
      cli::write_plot(cli::read_csv_file(plot_in), plot_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "locktp: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
