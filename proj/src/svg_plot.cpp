#include "foldsim/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "foldsim/errors.hpp"

namespace foldsim {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 784.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 432.0;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v, const char* format = "%.2f") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

Range data_range(const std::vector<PlotSeries>& series, bool use_x) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const PlotSeries& s : series) {
        const auto& values = use_x ? s.x : s.y;
        for (double v : values) {
            if (!std::isfinite(v)) throw ValueError("plot input contains a non-finite value");
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(lo <= hi)) return {0.0, 1.0};
    if (lo == hi) return {lo - 1.0, hi + 1.0};
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

double nice_step(double span) {
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (mult * mag >= raw) return mult * mag;
    }
    return 10.0 * mag;
}

std::vector<double> ticks(const Range& range) {
    const double step = nice_step(range.hi - range.lo);
    std::vector<double> out;
    double v = std::ceil(range.lo / step) * step;
    for (; v <= range.hi + 1e-12 * step; v += step) {
        out.push_back(v == 0.0 ? 0.0 : v); // normalize -0
    }
    return out;
}

} // namespace

std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<PlotSeries>& series) {
    const Range xr = data_range(series, true);
    const Range yr = data_range(series, false);
    const auto map_x = [&](double v) {
        return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * (kRight - kLeft);
    };
    const auto map_y = [&](double v) {
        return kBottom - (v - yr.lo) / (yr.hi - yr.lo) * (kBottom - kTop);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << num(kWidth, "%.0f")
        << " " << num(kHeight, "%.0f") << "\" font-family=\"monospace\" font-size=\"12\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth, "%.0f") << "\" height=\""
        << num(kHeight, "%.0f") << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\">"
        << escape(title) << "</text>\n";

    for (double v : ticks(xr)) {
        const double px = map_x(v);
        svg << "<line x1=\"" << num(px) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px)
            << "\" y2=\"" << num(kBottom) << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << num(px) << "\" y=\"" << num(kBottom + 16.0)
            << "\" text-anchor=\"middle\">" << num(v, "%.6g") << "</text>\n";
    }
    for (double v : ticks(yr)) {
        const double py = map_y(v);
        svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kRight)
            << "\" y2=\"" << num(py) << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << num(kLeft - 6.0) << "\" y=\"" << num(py + 4.0)
            << "\" text-anchor=\"end\">" << num(v, "%.6g") << "</text>\n";
    }
    svg << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\""
        << num(kRight - kLeft) << "\" height=\"" << num(kBottom - kTop)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num((kLeft + kRight) / 2) << "\" y=\"" << num(kHeight - 12.0)
        << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
    svg << "<text x=\"16\" y=\"" << num((kTop + kBottom) / 2)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << num((kTop + kBottom) / 2)
        << ")\">" << escape(y_label) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (i) svg << " ";
            svg << num(map_x(series[s].x[i])) << "," << num(map_y(series[s].y[i]));
        }
        svg << "\"/>\n";
        const double ly = kTop + 14.0 + 16.0 * static_cast<double>(s);
        svg << "<line x1=\"" << num(kRight - 150.0) << "\" y1=\"" << num(ly - 4.0) << "\" x2=\""
            << num(kRight - 126.0) << "\" y2=\"" << num(ly - 4.0) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << num(kRight - 120.0) << "\" y=\"" << num(ly) << "\">"
            << escape(series[s].label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write plot file '" + path + "'");
    out << render_line_plot(title, x_label, y_label, series);
}

} // namespace foldsim
