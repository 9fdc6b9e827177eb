// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace sift {

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    std::string label;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
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

/// Round tick spacing to 1/2/5 times a power of ten.
inline double nice_step(double span, int target_ticks) {
    if (span <= 0) return 1.0;
    const double raw = span / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    if (frac <= 1.0) return mag;
    if (frac <= 2.0) return 2.0 * mag;
    if (frac <= 5.0) return 5.0 * mag;
    return 10.0 * mag;
}

} // namespace detail

/// Static labeled scatter plot; used for the (mu*, sigma) sensitivity view.
inline void write_scatter_svg(std::ostream& out, const std::vector<ScatterPoint>& points,
                              const std::string& x_label, const std::string& y_label,
                              const std::string& title) {
    const double width = 720, height = 520;
    const double ml = 70, mr = 30, mt = 40, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double x_max = 1e-12, y_max = 1e-12;
    for (const auto& p : points) {
        x_max = std::max(x_max, p.x);
        y_max = std::max(y_max, p.y);
    }
    x_max *= 1.08;
    y_max *= 1.08;

    auto px = [&](double x) { return ml + x / x_max * pw; };
    auto py = [&](double y) { return mt + ph - y / y_max * ph; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "  <text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"16\">" << detail::xml_escape(title) << "</text>\n";

    // axes
    out << "  <line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";

    const double xs = detail::nice_step(x_max, 6);
    for (double v = 0.0; v <= x_max + 1e-12; v += xs) {
        out << "  <line x1=\"" << px(v) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(v) << "\" y2=\"" << mt + ph + 5
            << "\" stroke=\"black\"/>\n";
        out << "  <text x=\"" << px(v) << "\" y=\"" << mt + ph + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << detail::svg_num(v)
            << "</text>\n";
    }
    const double ys = detail::nice_step(y_max, 6);
    for (double v = 0.0; v <= y_max + 1e-12; v += ys) {
        out << "  <line x1=\"" << ml - 5 << "\" y1=\"" << py(v) << "\" x2=\"" << ml << "\" y2=\"" << py(v)
            << "\" stroke=\"black\"/>\n";
        out << "  <text x=\"" << ml - 9 << "\" y=\"" << py(v) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << detail::svg_num(v)
            << "</text>\n";
    }

    out << "  <text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << detail::xml_escape(x_label)
        << "</text>\n";
    out << "  <text x=\"18\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"13\" transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">" << detail::xml_escape(y_label)
        << "</text>\n";

    for (const auto& p : points) {
        out << "  <circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.y)
            << "\" r=\"4\" fill=\"steelblue\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
        out << "  <text x=\"" << px(p.x) + 6 << "\" y=\"" << py(p.y) - 6
            << "\" font-family=\"sans-serif\" font-size=\"10\">" << detail::xml_escape(p.label) << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace sift
