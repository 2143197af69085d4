#include "locktp/plot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace locktp::cli {

namespace {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, throughput)
};

std::vector<Series> collect_series(const std::vector<CsvRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("plot: no data rows");
  std::map<std::pair<std::int64_t, std::string>, Series> grouped;
  for (const auto& row : rows) {
    if (!row.x || !row.throughput || !row.c) {
      throw std::invalid_argument("plot: rows need c, x and throughput");
    }
    auto& series = grouped[{*row.c, row.source}];
    if (series.label.empty()) {
      series.label = row.source + " c=" + std::to_string(*row.c);
    }
    series.points.emplace_back(*row.x, *row.throughput);
  }
  std::vector<Series> out;
  for (auto& [key, series] : grouped) {
    std::sort(series.points.begin(), series.points.end());
    out.push_back(std::move(series));
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Bounds {
  double xmin, xmax, ymin, ymax;
};

Bounds data_bounds(const std::vector<Series>& series) {
  Bounds b{1e300, -1e300, 1e300, -1e300};
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      b.xmin = std::min(b.xmin, x);
      b.xmax = std::max(b.xmax, x);
      b.ymin = std::min(b.ymin, y);
      b.ymax = std::max(b.ymax, y);
    }
  }
  if (b.xmax <= b.xmin) b.xmax = b.xmin + 1.0;
  if (b.ymax <= b.ymin) b.ymax = b.ymin + 1.0;
  b.ymin = std::min(b.ymin, 0.0);
  return b;
}

}  // namespace

std::string render_svg(const std::vector<CsvRow>& rows) {
  const auto series = collect_series(rows);
  const Bounds b = data_bounds(series);

  const double width = 840.0, height = 520.0;
  const double ml = 90.0, mr = 30.0, mt = 30.0, mb = 60.0;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const auto sx = [&](double x) { return ml + (x - b.xmin) / (b.xmax - b.xmin) * pw; };
  const auto sy = [&](double y) { return mt + ph - (y - b.ymin) / (b.ymax - b.ymin) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Axes with 6 ticks each.
  svg << "<g stroke=\"#333\" fill=\"none\"><path d=\"M" << ml << ' ' << mt << " V" << mt + ph
      << " H" << ml + pw << "\"/></g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = b.xmin + (b.xmax - b.xmin) * i / 5.0;
    const double yv = b.ymin + (b.ymax - b.ymin) * i / 5.0;
    svg << "<line x1=\"" << sx(xv) << "\" y1=\"" << mt + ph << "\" x2=\"" << sx(xv)
        << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"#333\"/>"
        << "<text x=\"" << sx(xv) << "\" y=\"" << mt + ph + 20
        << "\" text-anchor=\"middle\">" << format_g6(xv) << "</text>\n";
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << sy(yv) << "\" x2=\"" << ml << "\" y2=\""
        << sy(yv) << "\" stroke=\"#333\"/>"
        << "<text x=\"" << ml - 9 << "\" y=\"" << sy(yv) + 4
        << "\" text-anchor=\"end\">" << format_g6(yv) << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">parallel multiplier x</text>\n"
      << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << mt + ph / 2
      << ")\">throughput (ops/s)</text>\n</g>\n";

  std::size_t color = 0;
  for (const auto& s : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[color % 8]
        << "\" stroke-width=\"1.8\" points=\"";
    for (const auto& [x, y] : s.points) svg << sx(x) << ',' << sy(y) << ' ';
    svg << "\"/>\n";
    ++color;
  }

  // Legend.
  svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  color = 0;
  for (const auto& s : series) {
    const double ly = mt + 16.0 + 18.0 * static_cast<double>(color);
    svg << "<line x1=\"" << ml + pw - 170 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw - 146
        << "\" y2=\"" << ly << "\" stroke=\"" << kPalette[color % 8]
        << "\" stroke-width=\"1.8\"/>"
        << "<text x=\"" << ml + pw - 140 << "\" y=\"" << ly + 4 << "\">" << s.label
        << "</text>\n";
    ++color;
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

std::string render_gnuplot(const std::vector<CsvRow>& rows) {
  const auto series = collect_series(rows);
  std::ostringstream out;
  out << "# throughput against parallel multiplier, one index block per series\n"
      << "# columns: x throughput\n";
  bool first = true;
  for (const auto& s : series) {
    if (!first) out << "\n\n";
    first = false;
    out << "# series: " << s.label << '\n';
    for (const auto& [x, y] : s.points) {
      out << format_g6(x) << ' ' << format_g6(y) << '\n';
    }
  }
  return out.str();
}

void write_plot(const std::vector<CsvRow>& rows, const std::string& out_path) {
  const bool svg = out_path.size() >= 4 && out_path.substr(out_path.size() - 4) == ".svg";
  write_text_file(out_path, svg ? render_svg(rows) : render_gnuplot(rows));
}

}  // namespace locktp::cli
