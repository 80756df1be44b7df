#pragma once

// SVG figures rendered from a results table. File names are fixed; a figure
// whose rows are absent from the table is still written, with a note.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "satsense/results.hpp"

namespace satsense {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // sorted by x
};

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

std::vector<std::string> figure_names();

/// Writes every figure plus results.csv into `dir`; returns the paths written.
std::vector<std::filesystem::path> emit_plots(const ResultsTable& table, const std::filesystem::path& dir);

}  // namespace satsense
