#include "qregime/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace qregime {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

} // namespace

void write_svg_plot(const std::string& path, const PlotSpec& spec) {
    if (spec.series.empty()) throw std::invalid_argument("svg plot needs at least one series");

    auto y_value = [&](double y) { return spec.log_y ? std::log10(y) : y; };

    Range xr, yr;
    for (const auto& s : spec.series) {
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("svg plot: x and y lengths differ");
        if (!s.band_half.empty() && s.band_half.size() != s.y.size())
            throw std::invalid_argument("svg plot: band length differs from y");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (spec.log_y && y <= 0.0) continue; // not representable on a log axis
            xr.include(s.x[i]);
            yr.include(y_value(y));
            if (!s.band_half.empty()) {
                double lo = y - s.band_half[i], hi = y + s.band_half[i];
                if (!spec.log_y || lo > 0.0) yr.include(y_value(std::max(lo, 1e-300)));
                if (!spec.log_y || hi > 0.0) yr.include(y_value(hi));
            }
        }
    }
    if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo))
        throw std::invalid_argument("svg plot: no drawable points");
    if (xr.hi == xr.lo) xr.hi = xr.lo + 1.0;
    if (yr.hi == yr.lo) {
        yr.hi += 0.5;
        yr.lo -= 0.5;
    }

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto px = [&](double x) { return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto py = [&](double y) {
        return kMarginTop + (1.0 - (y_value(y) - yr.lo) / (yr.hi - yr.lo)) * plot_h;
    };

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";

    // embedded data table for auditing
    f << "<!-- data\n";
    for (const auto& s : spec.series) {
        f << "series: " << escape_xml(s.label) << "\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            f << fmt(s.x[i]) << ',' << fmt(s.y[i]);
            if (!s.band_half.empty()) f << ',' << fmt(s.band_half[i]);
            f << '\n';
        }
    }
    f << "-->\n";

    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">"
      << escape_xml(spec.title) << "</text>\n";

    // axes
    const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
    const double y0 = kHeight - kMarginBottom, y1 = kMarginTop;
    f << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
      << "\" stroke=\"black\"/>\n";
    f << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n";

    const int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        double fx = xr.lo + (xr.hi - xr.lo) * i / n_ticks;
        double gx = px(fx);
        f << "<line x1=\"" << gx << "\" y1=\"" << y0 << "\" x2=\"" << gx << "\" y2=\"" << y0 + 5
          << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << gx << "\" y=\"" << y0 + 18
          << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(fx)
          << "</text>\n";

        double fy = yr.lo + (yr.hi - yr.lo) * i / n_ticks;
        double gy = kMarginTop + (1.0 - static_cast<double>(i) / n_ticks) * plot_h;
        double label = spec.log_y ? std::pow(10.0, fy) : fy;
        f << "<line x1=\"" << x0 - 5 << "\" y1=\"" << gy << "\" x2=\"" << x0 << "\" y2=\"" << gy
          << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << x0 - 8 << "\" y=\"" << gy + 4
          << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
          << (spec.log_y ? ("1e" + fmt(std::round(std::log10(label) * 100) / 100)) : fmt(label))
          << "</text>\n";
    }
    f << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
      << escape_xml(spec.x_label) << "</text>\n";
    f << "<text x=\"16\" y=\"" << (y0 + y1) / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 16 "
      << (y0 + y1) / 2 << ")\">" << escape_xml(spec.y_label) << "</text>\n";

    for (std::size_t k = 0; k < spec.series.size(); ++k) {
        const auto& s = spec.series[k];
        const char* color = kPalette[k % (sizeof(kPalette) / sizeof(kPalette[0]))];

        if (!s.band_half.empty()) {
            std::string pts;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                double hi = s.y[i] + s.band_half[i];
                if (spec.log_y && hi <= 0.0) continue;
                pts += fmt(px(s.x[i])) + "," + fmt(py(hi)) + " ";
            }
            for (std::size_t i = s.x.size(); i-- > 0;) {
                double lo = s.y[i] - s.band_half[i];
                if (spec.log_y && lo <= 0.0) lo = std::min(s.y[i], 1e-300);
                if (spec.log_y && lo <= 0.0) continue;
                pts += fmt(px(s.x[i])) + "," + fmt(py(lo)) + " ";
            }
            if (!pts.empty())
                f << "<polygon points=\"" << pts << "\" fill=\"" << color
                  << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
        }

        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (spec.log_y && s.y[i] <= 0.0) continue;
            pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i])) + " ";
        }
        f << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\"/>\n";

        // legend entry
        double ly = kMarginTop + 14.0 * static_cast<double>(k);
        f << "<line x1=\"" << x1 - 130 << "\" y1=\"" << ly << "\" x2=\"" << x1 - 110 << "\" y2=\""
          << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        f << "<text x=\"" << x1 - 105 << "\" y=\"" << ly + 4
          << "\" font-size=\"11\" font-family=\"sans-serif\">" << escape_xml(s.label)
          << "</text>\n";
    }

    f << "</svg>\n";
    if (!f) throw std::runtime_error("svg write failed for " + path);
}

} // namespace qregime
