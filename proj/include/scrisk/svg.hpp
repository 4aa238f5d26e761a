#pragma once

#include <string>
#include <utility>
#include <vector>

namespace scrisk {
namespace svg {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

// Minimal fixed-size line chart (one polyline per series, legend, axes).
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series);

// Horizontal bar chart, one bar per (label, value), in the given order.
std::string bar_chart(const std::string& title,
                      const std::vector<std::pair<std::string, double>>& bars);

}  // namespace svg
}  // namespace scrisk
