#pragma once

#include <string>
#include <vector>

namespace eplab::cli {

// Non-finite y values break the polyline.
struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Panel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

// Static SVG 1.1 document, panels stacked vertically. Output depends only
// on the input values.
std::string render_svg(const std::vector<Panel>& panels);

}  // namespace eplab::cli
