#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ntklab {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    // optional shaded band around the curve (e.g. +-1 std)
    std::vector<double> y_lo;
    std::vector<double> y_hi;
};

// Minimal self-contained SVG line chart. Log axes drop nonpositive samples.
struct SvgChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool x_log = false;
    bool y_log = false;
    std::vector<SvgSeries> series;

    std::string render(int width = 720, int height = 480) const;
};

}  // namespace ntklab
