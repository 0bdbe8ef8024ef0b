#pragma once

#include <string>
#include <vector>

namespace mmdval {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

/// Standalone SVG: framed axes with ticks, one polyline per series, legend.
std::string render_svg(const LineChart& chart);

} // namespace mmdval
