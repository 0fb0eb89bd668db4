#pragma once

#include <string>
#include <vector>

namespace qregime {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> band_half; // optional CI half-widths, same length as y
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::vector<Series> series;
};

// Standalone SVG line plot with optional confidence bands. The plotted data
// is embedded as an XML comment so the figure can be audited without
// re-running anything.
void write_svg_plot(const std::string& path, const PlotSpec& spec);

} // namespace qregime
