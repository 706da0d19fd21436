#pragma once

#include <string>
#include <vector>

#include "gridflex/linalg.hpp"

namespace gridflex {

struct PlotSeries {
    std::string label;
    Vector x;
    Vector y;
};

// Renders line series into a self-contained 800x480 SVG. Output is fully
// deterministic: fixed palette, fixed tick count, snprintf number formatting.
std::string emit_svg(const std::vector<PlotSeries>& series, const std::string& title,
                     const std::string& x_label, const std::string& y_label);

}  // namespace gridflex
