// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace otfs {

// Minimal log-y curve plot, enough to eyeball sweep outputs. Presentation
// only; nothing downstream consumes these files.
struct SvgCurve {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;  // plotted on log10 axis; non-positive points dropped
};

inline std::string render_svg(const std::vector<SvgCurve>& curves, const std::string& x_label,
                              const std::string& y_label) {
    const double w = 640, h = 480, ml = 70, mr = 20, mt = 20, mb = 50;
    double x_min = 1e300, x_max = -1e300, ly_min = 1e300, ly_max = -1e300;
    for (const auto& c : curves)
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            if (c.y[i] <= 0.0) continue;
            x_min = std::min(x_min, c.x[i]);
            x_max = std::max(x_max, c.x[i]);
            ly_min = std::min(ly_min, std::log10(c.y[i]));
            ly_max = std::max(ly_max, std::log10(c.y[i]));
        }
    if (x_min > x_max) { x_min = 0; x_max = 1; ly_min = -1; ly_max = 0; }
    if (x_max == x_min) x_max = x_min + 1;
    ly_min = std::floor(ly_min);
    ly_max = std::ceil(ly_max);
    if (ly_max == ly_min) ly_max = ly_min + 1;

    auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (w - ml - mr); };
    auto py = [&](double ly) { return h - mb - (ly - ly_min) / (ly_max - ly_min) * (h - mt - mb); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (int d = static_cast<int>(ly_min); d <= static_cast<int>(ly_max); ++d) {
        const double yy = py(d);
        os << "<line x1=\"" << ml << "\" y1=\"" << yy << "\" x2=\"" << w - mr << "\" y2=\"" << yy
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << yy + 4
           << "\" font-size=\"11\" text-anchor=\"end\">1e" << d << "</text>\n";
    }
    const int xticks = 6;
    for (int i = 0; i <= xticks; ++i) {
        const double xv = x_min + (x_max - x_min) * i / xticks;
        const double xx = px(xv);
        os << "<line x1=\"" << xx << "\" y1=\"" << mt << "\" x2=\"" << xx << "\" y2=\"" << h - mb
           << "\" stroke=\"#eee\"/>\n";
        os << "<text x=\"" << xx << "\" y=\"" << h - mb + 16
           << "\" font-size=\"11\" text-anchor=\"middle\">" << xv << "</text>\n";
    }
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\""
       << h - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
       << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label << "</text>\n";
    os << "<text x=\"16\" y=\"" << (mt + h - mb) / 2
       << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (mt + h - mb) / 2 << ")\">" << y_label << "</text>\n";

    double legend_y = mt + 14;
    for (const auto& c : curves) {
        os << "<polyline fill=\"none\" stroke=\"" << c.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            if (c.y[i] <= 0.0) continue;
            os << px(c.x[i]) << ',' << py(std::log10(c.y[i])) << ' ';
        }
        os << "\"/>\n";
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            if (c.y[i] <= 0.0) continue;
            os << "<circle cx=\"" << px(c.x[i]) << "\" cy=\"" << py(std::log10(c.y[i]))
               << "\" r=\"3\" fill=\"" << c.color << "\"/>\n";
        }
        os << "<line x1=\"" << w - mr - 150 << "\" y1=\"" << legend_y << "\" x2=\"" << w - mr - 120
           << "\" y2=\"" << legend_y << "\" stroke=\"" << c.color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << w - mr - 114 << "\" y=\"" << legend_y + 4 << "\" font-size=\"12\">"
           << c.label << "</text>\n";
        legend_y += 16;
    }
    os << "</svg>\n";
    return os.str();
}

inline void write_svg(const std::vector<SvgCurve>& curves, const std::string& x_label,
                      const std::string& y_label, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f << render_svg(curves, x_label, y_label);
}

}  // namespace otfs
