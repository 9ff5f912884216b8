#ifndef NICSIM_SVG_PLOT_HPP
#define NICSIM_SVG_PLOT_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nicsim {

struct PlotSeries {
    std::string label;
    std::vector<std::pair<int, double>> points; // (n, latency_us), sorted by n
    bool dashed = false;
};

struct PlotOptions {
    std::string title;
    std::optional<double> ref_line_us; // horizontal reference line
    std::string ref_label;
    int width = 720;
    int height = 480;
};

// Latency (us) vs number of nodes, log2-spaced x ticks, one polyline per
// series, legend. Output is self-contained SVG 1.1.
std::string render_latency_svg(const std::vector<PlotSeries>& series,
                               const PlotOptions& opts);

} // namespace nicsim

#endif
