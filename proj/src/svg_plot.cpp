#include "nicsim/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nicsim/topology.hpp"

namespace nicsim {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

std::string render_latency_svg(const std::vector<PlotSeries>& series,
                               const PlotOptions& opts) {
    if (series.empty())
        throw ConfigError("plot: no series to render");
    std::set<int> ns;
    double y_max = 0.0;
    for (const auto& s : series) {
        if (s.points.empty()) throw ConfigError("plot: empty series " + s.label);
        for (auto [n, us] : s.points) {
            if (n < 1) throw ConfigError("plot: node count must be positive");
            ns.insert(n);
            y_max = std::max(y_max, us);
        }
    }
    if (opts.ref_line_us) y_max = std::max(y_max, *opts.ref_line_us);
    if (y_max <= 0.0) y_max = 1.0;
    y_max *= 1.08;

    double x_lo = std::log2(static_cast<double>(*ns.begin()));
    double x_hi = std::log2(static_cast<double>(*ns.rbegin()));
    if (x_hi - x_lo < 1e-9) x_hi = x_lo + 1.0;

    const double ml = 64, mr = 160, mt = 40, mb = 48;
    const double pw = opts.width - ml - mr, ph = opts.height - mt - mb;
    auto X = [&](int n) {
        return ml + (std::log2(static_cast<double>(n)) - x_lo) / (x_hi - x_lo) * pw;
    };
    auto Y = [&](double us) { return mt + ph - us / y_max * ph; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
        << "width=\"" << opts.width << "\" height=\"" << opts.height
        << "\" viewBox=\"0 0 " << opts.width << " " << opts.height << "\">\n"
        << "<rect width=\"" << opts.width << "\" height=\"" << opts.height
        << "\" fill=\"white\"/>\n";
    if (!opts.title.empty())
        svg << "<text x=\"" << opts.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"15\">"
            << xml_escape(opts.title) << "</text>\n";

    // axes
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
        << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
        << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";

    // x ticks at the observed node counts (log2-spaced)
    for (int n : ns) {
        double x = X(n);
        svg << "<line class=\"xtick\" x1=\"" << fmt(x) << "\" y1=\"" << mt + ph
            << "\" x2=\"" << fmt(x) << "\" y2=\"" << mt + ph + 5
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << fmt(x) << "\" y=\"" << mt + ph + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
            << "font-size=\"11\">" << n << "</text>\n";
    }
    svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opts.height - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << "Number of nodes</text>\n";

    // y ticks: 5 even divisions
    for (int i = 0; i <= 5; ++i) {
        double us = y_max * i / 5.0;
        double y = Y(us);
        svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt(y) << "\" x2=\"" << ml
            << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << ml - 8 << "\" y=\"" << fmt(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(us) << "</text>\n";
    }
    svg << "<text x=\"14\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 14 " << mt + ph / 2 << ")\">"
        << "Latency (&#181;s)</text>\n";

    if (opts.ref_line_us) {
        double y = Y(*opts.ref_line_us);
        svg << "<line class=\"refline\" x1=\"" << ml << "\" y1=\"" << fmt(y)
            << "\" x2=\"" << ml + pw << "\" y2=\"" << fmt(y)
            << "\" stroke=\"#666666\" stroke-dasharray=\"2,4\"/>\n";
        if (!opts.ref_label.empty())
            svg << "<text x=\"" << ml + 4 << "\" y=\"" << fmt(y - 4)
                << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#666666\">"
                << xml_escape(opts.ref_label) << "</text>\n";
    }

    size_t color = 0;
    double legend_y = mt + 10;
    for (const auto& s : series) {
        const char* col = kPalette[color++ % (sizeof(kPalette) / sizeof(*kPalette))];
        if (s.points.size() > 1) {
            svg << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\"";
            if (s.dashed) svg << " stroke-dasharray=\"6,4\"";
            svg << " points=\"";
            for (auto [n, us] : s.points)
                svg << fmt(X(n)) << ',' << fmt(Y(us)) << ' ';
            svg << "\"/>\n";
        }
        for (auto [n, us] : s.points)
            svg << "<circle cx=\"" << fmt(X(n)) << "\" cy=\"" << fmt(Y(us))
                << "\" r=\"2.5\" fill=\"" << col << "\"/>\n";
        svg << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << fmt(legend_y)
            << "\" x2=\"" << ml + pw + 34 << "\" y2=\"" << fmt(legend_y)
            << "\" stroke=\"" << col << "\" stroke-width=\"1.5\""
            << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n"
            << "<text x=\"" << ml + pw + 40 << "\" y=\"" << fmt(legend_y + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\">"
            << xml_escape(s.label) << "</text>\n";
        legend_y += 18;
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace nicsim
