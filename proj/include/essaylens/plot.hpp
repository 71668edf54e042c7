// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#pragma once

#include <string>
#include <vector>

namespace essaylens {

struct PlotSeries {
    std::string name;
    std::vector<double> values; ///< one per x label; NaN leaves a gap
};

/// Static SVG line chart over categorical x positions.
std::string svg_line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                           const std::vector<PlotSeries>& series, const std::string& y_label = {});

/// Horizontal bar chart, bars drawn top to bottom in the given order.
std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values, const std::string& x_label = {});

} // namespace essaylens
