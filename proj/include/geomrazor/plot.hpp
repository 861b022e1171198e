#pragma once

#include <string>
#include <vector>

#include "geomrazor/io.hpp"

namespace geomrazor {

/// Renders the selected CSV columns as a standalone SVG line chart with
/// axes, per-series polylines with markers, and a legend.  Output bytes are
/// a pure function of the inputs.
std::string render_plot_svg(const CsvTable& table, const std::string& x_column,
                            const std::vector<std::string>& y_columns);

void emit_plot(const std::string& csv_path, const std::string& x_column,
               const std::vector<std::string>& y_columns, const std::string& svg_path);

}  // namespace geomrazor
