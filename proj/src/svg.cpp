#include "gridflex/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gridflex {

namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 72;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 48;
constexpr int kMarginBottom = 56;
constexpr int kTicks = 5;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
const char* kDashes[] = {"", "6,3", "2,2", "8,3,2,3", "4,4", "1,3"};
constexpr std::size_t kStyleCount = 6;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

}  // namespace

std::string emit_svg(const std::vector<PlotSeries>& series, const std::string& title,
                     const std::string& x_label, const std::string& y_label) {
    if (series.empty()) throw Error("nothing to plot");
    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    for (const PlotSeries& s : series) {
        if (s.x.size() != s.y.size() || s.x.empty())
            throw Error("plot series '" + s.label + "' is empty or ragged");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    }
    if (x_hi - x_lo < 1e-12) { x_lo -= 0.5; x_hi += 0.5; }
    double pad = 0.05 * (y_hi - y_lo);
    if (pad < 1e-12) pad = std::max(0.5, std::abs(y_lo) * 0.05 + 1e-6);
    y_lo -= pad;
    y_hi += pad;

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const auto sx = [&](double v) { return kMarginLeft + (v - x_lo) / (x_hi - x_lo) * plot_w; };
    const auto sy = [&](double v) {
        return kMarginTop + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h;
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
           "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " +
           std::to_string(kWidth) + " " + std::to_string(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string(kWidth / 2) +
           "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">" +
           escape(title) + "</text>\n";

    // grid and ticks
    for (int i = 0; i <= kTicks; ++i) {
        const double fx = x_lo + (x_hi - x_lo) * i / kTicks;
        const double fy = y_lo + (y_hi - y_lo) * i / kTicks;
        const double px = sx(fx), py = sy(fy);
        svg += "<line x1=\"" + num(px) + "\" y1=\"" + num(double(kMarginTop)) + "\" x2=\"" +
               num(px) + "\" y2=\"" + num(kMarginTop + plot_h) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<line x1=\"" + num(double(kMarginLeft)) + "\" y1=\"" + num(py) + "\" x2=\"" +
               num(kMarginLeft + plot_w) + "\" y2=\"" + num(py) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + num(px) + "\" y=\"" + num(kMarginTop + plot_h + 18) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
               fmt(fx) + "</text>\n";
        svg += "<text x=\"" + num(kMarginLeft - 8) + "\" y=\"" + num(py + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + fmt(fy) +
               "</text>\n";
    }
    svg += "<rect x=\"" + std::to_string(kMarginLeft) + "\" y=\"" + std::to_string(kMarginTop) +
           "\" width=\"" + num(plot_w) + "\" height=\"" + num(plot_h) +
           "\" fill=\"none\" stroke=\"#333333\"/>\n";
    svg += "<text x=\"" + num(kMarginLeft + plot_w / 2) + "\" y=\"" +
           std::to_string(kHeight - 14) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" +
           escape(x_label) + "</text>\n";
    svg += "<text x=\"18\" y=\"" + num(kMarginTop + plot_h / 2) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 18 " +
           num(kMarginTop + plot_h / 2) + ")\">" + escape(y_label) + "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const PlotSeries& ps = series[s];
        std::string path = "M";
        for (std::size_t i = 0; i < ps.x.size(); ++i) {
            if (i) path += " L";
            path += num(sx(ps.x[i])) + " " + num(sy(ps.y[i]));
        }
        const std::size_t style = s % kStyleCount;
        svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + kPalette[style] +
               "\" stroke-width=\"2\"";
        if (kDashes[style][0]) svg += " stroke-dasharray=\"" + std::string(kDashes[style]) + "\"";
        svg += "/>\n";
    }

    // legend, input order
    for (std::size_t s = 0; s < series.size(); ++s) {
        const double ly = kMarginTop + 10 + 18.0 * double(s);
        const double lx = kMarginLeft + plot_w - 150;
        const std::size_t style = s % kStyleCount;
        svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 26) +
               "\" y2=\"" + num(ly) + "\" stroke=\"" + kPalette[style] + "\" stroke-width=\"2\"";
        if (kDashes[style][0]) svg += " stroke-dasharray=\"" + std::string(kDashes[style]) + "\"";
        svg += "/>\n";
        svg += "<text x=\"" + num(lx + 32) + "\" y=\"" + num(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(series[s].label) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace gridflex
