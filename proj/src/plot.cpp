// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string_view>

namespace essaylens {

namespace {

constexpr std::array<const char*, 8> kPalette{"#1b6ca8", "#d1495b", "#66a182", "#edae49",
                                               "#6c4f9c", "#00798c", "#8d6a3f", "#555555"};

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

Range padded_range(double lo, double hi, bool include_zero) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) return {};
    if (include_zero) {
        lo = std::min(lo, 0.0);
        hi = std::max(hi, 0.0);
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - (include_zero && lo == 0.0 ? 0.0 : pad), hi + pad};
}

std::string header(double w, double h, const std::string& title) {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
                    "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(w / 2) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
         "</text>\n";
    return s;
}

} // namespace

std::string svg_line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                           const std::vector<PlotSeries>& series, const std::string& y_label) {
    const double w = 640, h = 400, left = 60, right = 150, top = 30, bottom = 70;
    const double pw = w - left - right, ph = h - top - bottom;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& s : series) {
        for (double v : s.values) {
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    const auto r = padded_range(lo, hi, false);
    const std::size_t nx = x_labels.size();
    auto xpos = [&](std::size_t i) { return left + (nx <= 1 ? pw / 2 : pw * static_cast<double>(i) / static_cast<double>(nx - 1)); };
    auto ypos = [&](double v) { return top + ph * (1.0 - (v - r.lo) / (r.hi - r.lo)); };

    std::string s = header(w, h, title);
    s += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(left + pw) + "\" y2=\"" +
         num(top + ph) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" + num(top + ph) +
         "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = r.lo + (r.hi - r.lo) * t / 4.0;
        s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(ypos(v) + 4) + "\" text-anchor=\"end\">" + tick(v) +
             "</text>\n";
    }
    for (std::size_t i = 0; i < nx; ++i) {
        s += "<text transform=\"translate(" + num(xpos(i)) + "," + num(top + ph + 14) +
             ") rotate(30)\" text-anchor=\"start\">" + escape(x_labels[i]) + "</text>\n";
    }
    if (!y_label.empty()) {
        s += "<text transform=\"translate(14," + num(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
             escape(y_label) + "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = kPalette[k % kPalette.size()];
        std::string path;
        bool pen = false;
        for (std::size_t i = 0; i < nx && i < series[k].values.size(); ++i) {
            const double v = series[k].values[i];
            if (!std::isfinite(v)) {
                pen = false;
                continue;
            }
            path += (pen ? " L" : " M") + num(xpos(i)) + " " + num(ypos(v));
            pen = true;
            s += "<circle cx=\"" + num(xpos(i)) + "\" cy=\"" + num(ypos(v)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
        }
        if (!path.empty()) {
            s += "<path d=\"" + path.substr(1) + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        }
        const double ly = top + 14.0 * static_cast<double>(k);
        s += "<rect x=\"" + num(w - right + 12) + "\" y=\"" + num(ly) + "\" width=\"10\" height=\"10\" fill=\"" +
             color + "\"/>\n";
        s += "<text x=\"" + num(w - right + 26) + "\" y=\"" + num(ly + 9) + "\">" + escape(series[k].name) +
             "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values, const std::string& x_label) {
    const double bar = 16, gap = 4, left = 150, right = 40, top = 30, bottom = 40, w = 640;
    const double n = static_cast<double>(labels.size());
    const double h = top + bottom + std::max(1.0, n) * (bar + gap);
    const double pw = w - left - right;
    double lo = 0.0, hi = 0.0;
    for (double v : values) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const auto r = padded_range(lo, hi, true);
    auto xpos = [&](double v) { return left + pw * (v - r.lo) / (r.hi - r.lo); };

    std::string s = header(w, h, title);
    const double zero = xpos(0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = top + static_cast<double>(i) * (bar + gap);
        const double v = i < values.size() && std::isfinite(values[i]) ? values[i] : 0.0;
        const double x0 = std::min(zero, xpos(v)), x1 = std::max(zero, xpos(v));
        s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y) + "\" width=\"" + num(x1 - x0) + "\" height=\"" + num(bar) +
             "\" fill=\"" + kPalette[0] + "\"/>\n";
        s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(y + bar - 4) + "\" text-anchor=\"end\">" +
             escape(labels[i]) + "</text>\n";
        s += "<text x=\"" + num(x1 + 4) + "\" y=\"" + num(y + bar - 4) + "\">" + tick(v) + "</text>\n";
    }
    const double axis_y = top + n * (bar + gap);
    s += "<line x1=\"" + num(zero) + "\" y1=\"" + num(top) + "\" x2=\"" + num(zero) + "\" y2=\"" + num(axis_y) +
         "\" stroke=\"black\"/>\n";
    if (!x_label.empty()) {
        s += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(axis_y + 24) + "\" text-anchor=\"middle\">" +
             escape(x_label) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

} // namespace essaylens
