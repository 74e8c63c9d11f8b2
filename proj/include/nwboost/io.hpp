#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "nwboost/smoother.hpp"

namespace nwboost {

//! Number formatted with 6 significant digits (all numeric file output).
std::string num6(double v);

struct ParseError : std::runtime_error {
  ParseError(int line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
  int line;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Reads a two-numeric-column CSV (header row optional) into a Sample.
//! Throws ParseError naming the offending 1-based line.
Sample read_xy_csv(const std::filesystem::path& path);

//! One polyline on an SvgPlot.
struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

//! Writes a minimal static SVG line plot (axes, ticks, legend).
void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<SvgSeries>& series);

}  // namespace nwboost
