#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "litscreen/eval.hpp"

namespace litscreen::svg {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;  // in [0,1] x [0,1]
    bool marker_only = false;                       // single operating points
};

/// Minimal unit-square line chart with a legend.
void write_chart(std::ostream& out, const std::string& title, const std::string& x_label, const std::string& y_label,
                 std::span<const Series> series);

Series curve_series(const std::string& label, const eval::Curve& curve);

}  // namespace litscreen::svg
