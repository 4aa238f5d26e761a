#include "scrisk/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace scrisk {
namespace svg {

namespace {

constexpr double kWidth = 880.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series) {
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    bool first = true;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double y) { return kHeight - kBottom - (y - ymin) / (ymax - ymin) * plot_h; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">"
       << escape(title) << "</text>\n";
    os << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
       << kWidth - kRight << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
       << kHeight - kBottom << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        os << "<text x=\"" << px(fx) << "\" y=\"" << kHeight - kBottom + 20
           << "\" text-anchor=\"middle\" font-size=\"12\">" << num(fx) << "</text>\n";
        os << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(fy) + 4
           << "\" text-anchor=\"end\" font-size=\"12\">" << num(fy) << "</text>\n";
    }
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 15
       << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(x_label) << "</text>\n";
    os << "<text x=\"18\" y=\"" << kHeight / 2
       << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 " << kHeight / 2
       << ")\">" << escape(y_label) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % 6];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[s].points) {
            os << num(px(x)) << "," << num(py(y)) << " ";
        }
        os << "\"/>\n";
        const double ly = kTop + 18.0 * static_cast<double>(s);
        os << "<rect x=\"" << kLeft + 12 << "\" y=\"" << ly << "\" width=\"14\" height=\"4\" fill=\""
           << color << "\"/>\n";
        os << "<text x=\"" << kLeft + 32 << "\" y=\"" << ly + 6 << "\" font-size=\"12\">"
           << escape(series[s].name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string bar_chart(const std::string& title,
                      const std::vector<std::pair<std::string, double>>& bars) {
    const double row_h = 22.0;
    const double height = kTop + row_h * static_cast<double>(bars.size()) + 30.0;
    const double label_w = 280.0;
    double vmax = 0.0;
    for (const auto& [label, v] : bars) vmax = std::max(vmax, std::fabs(v));
    if (vmax == 0.0) vmax = 1.0;
    const double plot_w = kWidth - label_w - 80.0;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">"
       << escape(title) << "</text>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double y = kTop + row_h * static_cast<double>(i);
        const double w = std::fabs(bars[i].second) / vmax * plot_w;
        os << "<text x=\"" << label_w - 8 << "\" y=\"" << y + 14
           << "\" text-anchor=\"end\" font-size=\"12\">" << escape(bars[i].first) << "</text>\n";
        os << "<rect x=\"" << label_w << "\" y=\"" << y + 3 << "\" width=\"" << num(w)
           << "\" height=\"" << row_h - 8 << "\" fill=\"#1f77b4\"/>\n";
        os << "<text x=\"" << label_w + w + 6 << "\" y=\"" << y + 14 << "\" font-size=\"11\">"
           << num(bars[i].second) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace svg
}  // namespace scrisk
