#include "geomrazor/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace geomrazor {

namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 830.0;
constexpr double kTop = 24.0;
constexpr double kBottom = 484.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fixed2(double v) {
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

std::string shortest(double v) {
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct Range {
    double lo, hi;
    double map(double v, double out_lo, double out_hi) const {
        return out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo);
    }
};

Range padded_range(double lo, double hi) {
    if (lo == hi) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    return Range{lo - pad, hi + pad};
}

}  // namespace

std::string render_plot_svg(const CsvTable& table, const std::string& x_column,
                            const std::vector<std::string>& y_columns) {
    if (table.rows.empty()) throw std::invalid_argument("render_plot_svg: CSV has no data rows");
    if (y_columns.empty()) throw std::invalid_argument("render_plot_svg: no y columns given");

    const std::size_t xi = table.column_index(x_column);
    std::vector<std::size_t> yi;
    for (const std::string& name : y_columns) yi.push_back(table.column_index(name));

    // Collect series, skipping rows with empty cells.
    std::vector<std::vector<std::pair<double, double>>> series(yi.size());
    double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
    bool any = false;
    for (const auto& row : table.rows) {
        const double x = row[xi];
        if (std::isnan(x)) continue;
        for (std::size_t s = 0; s < yi.size(); ++s) {
            const double y = row[yi[s]];
            if (std::isnan(y)) continue;
            series[s].emplace_back(x, y);
            if (!any) {
                x_lo = x_hi = x;
                y_lo = y_hi = y;
                any = true;
            } else {
                x_lo = std::min(x_lo, x);
                x_hi = std::max(x_hi, x);
                y_lo = std::min(y_lo, y);
                y_hi = std::max(y_hi, y);
            }
        }
    }
    if (!any) throw std::invalid_argument("render_plot_svg: selected columns hold no values");

    const Range xr = padded_range(x_lo, x_hi);
    const Range yr = padded_range(y_lo, y_hi);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";

    // grid and tick labels, 5 ticks per axis
    for (int t = 0; t <= 5; ++t) {
        const double fx = x_lo + (x_hi - x_lo) * t / 5.0;
        const double px = xr.map(fx, kLeft, kRight);
        svg << "<line x1=\"" << fixed2(px) << "\" y1=\"" << fixed2(kTop) << "\" x2=\""
            << fixed2(px) << "\" y2=\"" << fixed2(kBottom) << "\" stroke=\"#e0e0e0\"/>\n";
        svg << "<text x=\"" << fixed2(px) << "\" y=\"" << fixed2(kBottom + 18.0)
            << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">"
            << shortest(fx) << "</text>\n";

        const double fy = y_lo + (y_hi - y_lo) * t / 5.0;
        const double py = yr.map(fy, kBottom, kTop);
        svg << "<line x1=\"" << fixed2(kLeft) << "\" y1=\"" << fixed2(py) << "\" x2=\""
            << fixed2(kRight) << "\" y2=\"" << fixed2(py) << "\" stroke=\"#e0e0e0\"/>\n";
        svg << "<text x=\"" << fixed2(kLeft - 6.0) << "\" y=\"" << fixed2(py + 4.0)
            << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">" << shortest(fy)
            << "</text>\n";
    }

    // axes
    svg << "<line x1=\"" << fixed2(kLeft) << "\" y1=\"" << fixed2(kBottom) << "\" x2=\""
        << fixed2(kRight) << "\" y2=\"" << fixed2(kBottom) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << fixed2(kLeft) << "\" y1=\"" << fixed2(kTop) << "\" x2=\""
        << fixed2(kLeft) << "\" y2=\"" << fixed2(kBottom) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fixed2(0.5 * (kLeft + kRight)) << "\" y=\"" << fixed2(kHeight - 8.0)
        << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">" << x_column
        << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        auto pts = series[s];
        std::sort(pts.begin(), pts.end());
        if (pts.size() > 1) {
            svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (i) svg << ' ';
                svg << fixed2(xr.map(pts[i].first, kLeft, kRight)) << ','
                    << fixed2(yr.map(pts[i].second, kBottom, kTop));
            }
            svg << "\"/>\n";
        }
        for (const auto& [x, y] : pts) {
            svg << "<circle cx=\"" << fixed2(xr.map(x, kLeft, kRight)) << "\" cy=\""
                << fixed2(yr.map(y, kBottom, kTop)) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        }
    }

    // legend
    for (std::size_t s = 0; s < y_columns.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        const double ly = kTop + 16.0 + 18.0 * static_cast<double>(s);
        svg << "<rect x=\"" << fixed2(kRight - 150.0) << "\" y=\"" << fixed2(ly - 9.0)
            << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
        svg << "<text x=\"" << fixed2(kRight - 132.0) << "\" y=\"" << fixed2(ly + 1.0)
            << "\" font-size=\"12\" font-family=\"sans-serif\">" << y_columns[s] << "</text>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

void emit_plot(const std::string& csv_path, const std::string& x_column,
               const std::vector<std::string>& y_columns, const std::string& svg_path) {
    const CsvTable table = read_csv(csv_path);
    write_text_file(svg_path, render_plot_svg(table, x_column, y_columns));
}

}  // namespace geomrazor
