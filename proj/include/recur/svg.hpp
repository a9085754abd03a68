#pragma once

#include <string>
#include <utility>
#include <vector>

namespace recur {

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points; // (x, y), x ascending
};

// Standalone SVG of right-continuous step functions on [0, max x] x [0, 1],
// with axes, ticks, and a legend. No external assets.
std::string svg_step_plot(const std::vector<SvgSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label);

// Scatter of values grouped into labelled columns (residuals by category).
std::string svg_category_scatter(const std::vector<std::pair<int, double>>& points,
                                 const std::vector<std::string>& group_labels,
                                 const std::string& title, const std::string& y_label);

} // namespace recur
