#pragma once

#include <string>
#include <vector>

#include "locktp/csv.hpp"

namespace locktp::cli {

/// Line-chart data of throughput against the parallel multiplier x, one
/// series per (c, source). Rows must carry x and throughput.
std::string render_svg(const std::vector<CsvRow>& rows);

/// Same series as whitespace-separated gnuplot data, one index block per
/// series.
std::string render_gnuplot(const std::vector<CsvRow>& rows);

/// Writes SVG for a .svg output path, gnuplot data otherwise.
void write_plot(const std::vector<CsvRow>& rows, const std::string& out_path);

}  // namespace locktp::cli
