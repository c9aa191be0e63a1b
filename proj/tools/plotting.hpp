#pragma once

// Minimal SVG line plots. Plots are derived artifacts rendered from the CSV
// data; the CSVs remain the numeric contract.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qipf/errors.hpp"

namespace plotting {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    // Optional display clamp for spiky data: keep the y-range between these
    // percentiles of all plotted values. 0/1 disables.
    double y_lo_percentile = 0.0;
    double y_hi_percentile = 1.0;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

} // namespace detail

inline void write_svg(const std::filesystem::path& path,
                      const std::vector<Series>& series, const PlotOptions& opts) {
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
                                    "#bcbd22", "#17becf"};
    const double width = 720, height = 480;
    const double ml = 64, mr = 160, mt = 40, mb = 48;

    std::vector<double> all_x, all_y;
    for (const auto& s : series) {
        all_x.insert(all_x.end(), s.x.begin(), s.x.end());
        all_y.insert(all_y.end(), s.y.begin(), s.y.end());
    }
    if (all_x.empty()) throw qipf::InvalidParameterError("nothing to plot");

    double x_min = *std::min_element(all_x.begin(), all_x.end());
    double x_max = *std::max_element(all_x.begin(), all_x.end());
    double y_min, y_max;
    if (opts.y_lo_percentile > 0.0 || opts.y_hi_percentile < 1.0) {
        y_min = detail::percentile(all_y, opts.y_lo_percentile);
        y_max = detail::percentile(all_y, opts.y_hi_percentile);
    } else {
        y_min = *std::min_element(all_y.begin(), all_y.end());
        y_max = *std::max_element(all_y.begin(), all_y.end());
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;

    auto px = [&](double x) {
        return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr);
    };
    auto py = [&](double y) {
        double t = (y - y_min) / (y_max - y_min);
        t = std::clamp(t, 0.0, 1.0);
        return height - mb - t * (height - mt - mb);
    };

    std::ofstream out(path);
    if (!out) throw qipf::IoError("cannot write " + path.string());
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
        << "' height='" << height << "' viewBox='0 0 " << width << " " << height
        << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << width / 2 << "' y='24' text-anchor='middle' "
        << "font-family='sans-serif' font-size='16'>" << opts.title << "</text>\n";

    // frame + ticks
    out << "<rect x='" << ml << "' y='" << mt << "' width='" << width - ml - mr
        << "' height='" << height - mt - mb
        << "' fill='none' stroke='#333' stroke-width='1'/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = x_min + (x_max - x_min) * t / 4.0;
        const double yv = y_min + (y_max - y_min) * t / 4.0;
        out << "<text x='" << px(xv) << "' y='" << height - mb + 18
            << "' text-anchor='middle' font-family='sans-serif' font-size='11'>"
            << detail::fmt(xv) << "</text>\n";
        out << "<text x='" << ml - 6 << "' y='" << py(yv) + 4
            << "' text-anchor='end' font-family='sans-serif' font-size='11'>"
            << detail::fmt(yv) << "</text>\n";
    }
    out << "<text x='" << (ml + width - mr) / 2 << "' y='" << height - 10
        << "' text-anchor='middle' font-family='sans-serif' font-size='13'>"
        << opts.x_label << "</text>\n";
    out << "<text x='16' y='" << (mt + height - mb) / 2
        << "' text-anchor='middle' font-family='sans-serif' font-size='13' "
        << "transform='rotate(-90 16 " << (mt + height - mb) / 2 << ")'>"
        << opts.y_label << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kColors[s % 10];
        out << "<polyline fill='none' stroke='" << color
            << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            out << px(series[s].x[i]) << "," << py(series[s].y[i]);
            if (i + 1 < series[s].x.size()) out << " ";
        }
        out << "'/>\n";
        const double ly = mt + 16 + 18 * static_cast<double>(s);
        out << "<line x1='" << width - mr + 10 << "' y1='" << ly << "' x2='"
            << width - mr + 34 << "' y2='" << ly << "' stroke='" << color
            << "' stroke-width='2'/>\n";
        out << "<text x='" << width - mr + 40 << "' y='" << ly + 4
            << "' font-family='sans-serif' font-size='12'>" << series[s].label
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw qipf::IoError("write failed for " + path.string());
}

} // namespace plotting
