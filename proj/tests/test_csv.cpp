#include "doctest.h"

#include <random>
#include <stdexcept>
#include <string>

#include "locktp/commands.hpp"
#include "locktp/csv.hpp"
#include "locktp/plot.hpp"

using namespace locktp;
using cli::CsvRow;

namespace {

std::vector<CsvRow> random_table(int rows, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_int_distribution<std::int64_t> ival(1, 100000);
  std::uniform_real_distribution<double> rval(0.001, 1e7);
  std::vector<CsvRow> out;
  for (int i = 0; i < rows; ++i) {
    CsvRow row;
    const char* sources[] = {"predict-clh", "predict-queue", "sim", "bench"};
    row.source = sources[pick(rng)];
    row.lock = pick(rng) < 2 ? "clh" : (pick(rng) == 2 ? "spin" : "");
    row.n = ival(rng);
    row.c = ival(rng);
    if (pick(rng) != 0) row.p = ival(rng);
    if (pick(rng) != 0) row.x = rval(rng);
    if (pick(rng) == 0) row.duration_s = rval(rng);
    if (pick(rng) != 1) row.ops = ival(rng);
    row.throughput = rval(rng);
    row.regime = pick(rng) == 0 ? "" : (pick(rng) < 2 ? "saturated" : "unsaturated");
    out.push_back(row);
  }
  return out;
}

}  // namespace

TEST_CASE("csv emit/parse round-trip is byte-identical") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto table = random_table(60, seed);
    const std::string once = cli::to_csv(table);
    const std::string twice = cli::to_csv(cli::parse_csv(once));
    CHECK(once == twice);
  }
}

TEST_CASE("csv parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(cli::parse_csv("nope\n"), doctest::Contains("line 1"), cli::CsvError);

  const std::string bad_cols = std::string(cli::kCsvHeader) + "\nsim,clh,1,2\n";
  CHECK_THROWS_WITH_AS(cli::parse_csv(bad_cols), doctest::Contains("line 2"), cli::CsvError);

  const std::string bad_num =
      std::string(cli::kCsvHeader) + "\nsim,clh,1,100,100,1,,60,fast,saturated\n";
  CHECK_THROWS_WITH_AS(cli::parse_csv(bad_num), doctest::Contains("line 2"), cli::CsvError);

  const std::string bad_source =
      std::string(cli::kCsvHeader) + "\nguess,clh,1,100,100,1,,60,12.5,saturated\n";
  CHECK_THROWS_WITH_AS(cli::parse_csv(bad_source), doctest::Contains("guess"), cli::CsvError);
}

TEST_CASE("six significant digits survive the round trip") {
  CHECK(cli::format_g6(1590.9090909) == "1590.91");
  CHECK(cli::format_g6(3500.0) == "3500");
  CHECK(cli::format_g6(1e6) == "1e+06");
  // Re-parsing the printed form and printing again is stable.
  const double reparsed = std::stod(cli::format_g6(1590.9090909));
  CHECK(cli::format_g6(reparsed) == "1590.91");
}

TEST_CASE("grid specifications parse lists, ranges and steps") {
  CHECK(cli::parse_grid_values("1,5,10") == std::vector<std::int64_t>{1, 5, 10});
  CHECK(cli::parse_grid_values("3..6") == std::vector<std::int64_t>{3, 4, 5, 6});
  CHECK(cli::parse_grid_values("1..31:10") == std::vector<std::int64_t>{1, 11, 21, 31});
  CHECK(cli::parse_grid_values("7") == std::vector<std::int64_t>{7});
  CHECK_THROWS_AS(cli::parse_grid_values(""), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_grid_values("5..1"), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_grid_values("a,b"), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_grid_values("1..10:0"), std::invalid_argument);
}

TEST_CASE("machine files round-trip") {
  const model::MachineParams m{3.5e5, 40.0, 80.0, 80.0};
  const auto text = cli::machine_file_text(m);
  const auto back = cli::parse_machine_file(text);
  CHECK(back.alpha == m.alpha);
  CHECK(back.w == m.w);
  CHECK(back.r_i == m.r_i);
  CHECK(back.x == m.x);

  CHECK_THROWS_AS(cli::parse_machine_file("alpha=1\n"), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_machine_file("alpha=1\nw=2\nri=3\nbogus=4\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_machine_file("alpha=fast\nw=2\nri=3\n"), std::invalid_argument);
  // x defaults to w when omitted.
  const auto defaulted = cli::parse_machine_file("alpha=1000\nw=4\nri=8\n");
  CHECK(defaulted.x == 4.0);
}

TEST_CASE("compare joins on the workload key and reports errors") {
  const model::MachineParams m{3.5e5, 40.0, 80.0, 80.0};
  cli::GridSpec grid{{39}, {100}, {1, 41, 81, 121}};
  const auto predicted = cli::predict_rows(m, grid, cli::PredictModel::Clh);

  SUBCASE("identity comparison has zero error everywhere") {
    const auto report = cli::compare_tables(predicted, predicted, m);
    CHECK(report.rows.size() == 4);
    CHECK(report.max_rel_err == 0.0);
    CHECK(report.mean_rel_err == 0.0);
    REQUIRE(report.knees.size() == 1);
    CHECK(*report.knees[0].analytic_x == doctest::Approx(82.8));
    CHECK(*report.knees[0].grid_flip_x == 121.0);
  }

  SUBCASE("mismatched grids name the missing keys") {
    cli::GridSpec other{{39}, {100}, {1, 41}};
    const auto measured = cli::predict_rows(m, other, cli::PredictModel::Clh);
    CHECK_THROWS_WITH_AS(cli::compare_tables(predicted, measured, std::nullopt),
                         doctest::Contains("(n=39,c=100,p=8100)"), std::invalid_argument);
  }

  SUBCASE("summary text lists the knees") {
    const auto report = cli::compare_tables(predicted, predicted, m);
    const auto text = cli::summary_text(report);
    CHECK(text.find("knee n=39 c=100") != std::string::npos);
    CHECK(text.find("x_analytic=82.8") != std::string::npos);
  }
}

TEST_CASE("plot renders svg and gnuplot data") {
  const model::MachineParams m{3.5e5, 40.0, 80.0, 80.0};
  cli::GridSpec grid{{39}, {100, 500}, {1, 41, 81, 121}};
  const auto rows = cli::predict_rows(m, grid, cli::PredictModel::Clh);

  const auto svg = cli::render_svg(rows);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("predict-clh c=100") != std::string::npos);
  CHECK(svg.find("predict-clh c=500") != std::string::npos);

  const auto dat = cli::render_gnuplot(rows);
  CHECK(dat.find("# series: predict-clh c=100") != std::string::npos);
  CHECK(dat.find("\n\n") != std::string::npos);  // index block separator

  CHECK_THROWS_AS(cli::render_svg({}), std::invalid_argument);

  // Single-point input still renders.
  cli::GridSpec one{{39}, {100}, {1}};
  CHECK_NOTHROW(cli::render_svg(cli::predict_rows(m, one, cli::PredictModel::Clh)));
}
