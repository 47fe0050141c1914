#pragma once

#include <string>
#include <vector>

namespace foldsim {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Deterministic static line plot: fixed 800x480 viewbox, fixed tick
/// algorithm and palette, coordinates rounded to 0.01 px. Identical inputs
/// produce byte-identical SVG, so outputs can be golden-file tested.
std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<PlotSeries>& series);

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series);

} // namespace foldsim
