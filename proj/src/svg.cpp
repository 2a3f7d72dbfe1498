#include "litscreen/svg.hpp"

#include <array>
#include <cstdio>

namespace litscreen::svg {

namespace {

constexpr double kWidth = 480, kHeight = 420;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

double px(double x) { return kLeft + x * (kWidth - kLeft - kRight); }
double py(double y) { return kHeight - kBottom - y * (kHeight - kTop - kBottom); }

std::string escape(const std::string& s) {
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

}  // namespace

Series curve_series(const std::string& label, const eval::Curve& curve) {
    Series s;
    s.label = label;
    for (const auto& p : curve.points) s.points.emplace_back(p.x, p.y);
    return s;
}

void write_chart(std::ostream& out, const std::string& title, const std::string& x_label, const std::string& y_label,
                 std::span<const Series> series) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << escape(title)
        << "</text>\n";

    for (int i = 0; i <= 5; ++i) {
        const double t = i / 5.0;
        out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(py(0)) << "\" x2=\"" << num(px(t)) << "\" y2=\""
            << num(py(1)) << "\" stroke=\"#eee\"/>\n";
        out << "<line x1=\"" << num(px(0)) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(px(1)) << "\" y2=\""
            << num(py(t)) << "\" stroke=\"#eee\"/>\n";
        out << "<text x=\"" << num(px(t)) << "\" y=\"" << num(py(0) + 15) << "\" text-anchor=\"middle\">" << num(t)
            << "</text>\n";
        out << "<text x=\"" << num(px(0) - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">" << num(t)
            << "</text>\n";
    }
    out << "<rect x=\"" << num(px(0)) << "\" y=\"" << num(py(1)) << "\" width=\"" << num(px(1) - px(0))
        << "\" height=\"" << num(py(0) - py(1)) << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(px(0.5)) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">"
        << escape(x_label) << "</text>\n";
    out << "<text transform=\"translate(16," << num(py(0.5)) << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(y_label) << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* colour = kPalette[i % kPalette.size()];
        if (s.marker_only) {
            for (const auto& [x, y] : s.points)
                out << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"4\" fill=\"" << colour
                    << "\"/>\n";
        } else if (!s.points.empty()) {
            out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t k = 0; k < s.points.size(); ++k)
                out << (k ? " " : "") << num(px(s.points[k].first)) << ',' << num(py(s.points[k].second));
            out << "\"/>\n";
        }
        const double ly = kTop + 8 + 14.0 * static_cast<double>(i);
        out << "<rect x=\"" << num(px(0.55)) << "\" y=\"" << num(ly - 8) << "\" width=\"10\" height=\"10\" fill=\""
            << colour << "\"/>\n";
        out << "<text x=\"" << num(px(0.55) + 14) << "\" y=\"" << num(ly + 1) << "\">" << escape(s.label)
            << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace litscreen::svg
