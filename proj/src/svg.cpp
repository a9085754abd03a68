#include "recur/svg.hpp"

#include "recur/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace recur {

namespace {

const char* kPalette[] = {"#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#e67e22", "#16a085"};

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 70, kRight = 40, kTop = 50, kBottom = 60;

std::string attr(double v) { return fmt_num(v); }

void emit_frame(std::ostringstream& svg, const std::string& title, const std::string& x_label,
                const std::string& y_label) {
    svg << "<rect x='" << attr(kLeft) << "' y='" << attr(kTop) << "' width='"
        << attr(kWidth - kLeft - kRight) << "' height='" << attr(kHeight - kTop - kBottom)
        << "' fill='none' stroke='#333'/>\n";
    svg << "<text x='" << attr(kWidth / 2) << "' y='28' text-anchor='middle' font-size='16'>"
        << title << "</text>\n";
    svg << "<text x='" << attr(kWidth / 2) << "' y='" << attr(kHeight - 14)
        << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n";
    svg << "<text x='20' y='" << attr(kHeight / 2)
        << "' text-anchor='middle' font-size='13' transform='rotate(-90 20 " << attr(kHeight / 2)
        << ")'>" << y_label << "</text>\n";
}

} // namespace

std::string svg_step_plot(const std::vector<SvgSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label) {
    double x_max = 1;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) x_max = std::max(x_max, x);
    }
    x_max *= 1.05;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + x / x_max * plot_w; };
    auto py = [&](double y) { return kTop + (1.0 - y) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << attr(kWidth) << "' height='"
        << attr(kHeight) << "' viewBox='0 0 " << attr(kWidth) << ' ' << attr(kHeight) << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    emit_frame(svg, title, x_label, y_label);

    for (int i = 0; i <= 5; ++i) {
        const double y = i / 5.0;
        svg << "<line x1='" << attr(kLeft - 4) << "' y1='" << attr(py(y)) << "' x2='"
            << attr(kLeft) << "' y2='" << attr(py(y)) << "' stroke='#333'/>\n";
        svg << "<text x='" << attr(kLeft - 8) << "' y='" << attr(py(y) + 4)
            << "' text-anchor='end' font-size='11'>" << fmt_num(y) << "</text>\n";
    }
    const double x_tick = x_max > 40 ? 20 : (x_max > 16 ? 8 : 4);
    for (double x = 0; x <= x_max; x += x_tick) {
        svg << "<line x1='" << attr(px(x)) << "' y1='" << attr(kHeight - kBottom) << "' x2='"
            << attr(px(x)) << "' y2='" << attr(kHeight - kBottom + 4) << "' stroke='#333'/>\n";
        svg << "<text x='" << attr(px(x)) << "' y='" << attr(kHeight - kBottom + 18)
            << "' text-anchor='middle' font-size='11'>" << fmt_num(x) << "</text>\n";
    }

    for (size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % 6];
        std::ostringstream path;
        // Right-continuous steps: hold each estimate until the next support point.
        path << "M " << attr(px(0)) << ' ' << attr(py(1.0));
        double last_y = 1.0;
        for (const auto& [x, y] : series[s].points) {
            path << " L " << attr(px(x)) << ' ' << attr(py(last_y));
            path << " L " << attr(px(x)) << ' ' << attr(py(y));
            last_y = y;
        }
        path << " L " << attr(px(x_max)) << ' ' << attr(py(last_y));
        svg << "<path d='" << path.str() << "' fill='none' stroke='" << color
            << "' stroke-width='1.8'/>\n";
        const double ly = kTop + 16 + 18 * static_cast<double>(s);
        svg << "<line x1='" << attr(kWidth - kRight - 150) << "' y1='" << attr(ly) << "' x2='"
            << attr(kWidth - kRight - 126) << "' y2='" << attr(ly) << "' stroke='" << color
            << "' stroke-width='1.8'/>\n";
        svg << "<text x='" << attr(kWidth - kRight - 120) << "' y='" << attr(ly + 4)
            << "' font-size='12'>" << series[s].label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string svg_category_scatter(const std::vector<std::pair<int, double>>& points,
                                 const std::vector<std::string>& group_labels,
                                 const std::string& title, const std::string& y_label) {
    double y_abs = 1;
    for (const auto& [g, v] : points) y_abs = std::max(y_abs, std::abs(v));
    y_abs *= 1.1;
    const size_t n_groups = group_labels.size();

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double gx) { return kLeft + (gx + 0.5) / static_cast<double>(n_groups) * plot_w; };
    auto py = [&](double y) { return kTop + (y_abs - y) / (2 * y_abs) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << attr(kWidth) << "' height='"
        << attr(kHeight) << "' viewBox='0 0 " << attr(kWidth) << ' ' << attr(kHeight) << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    emit_frame(svg, title, "", y_label);

    svg << "<line x1='" << attr(kLeft) << "' y1='" << attr(py(0)) << "' x2='"
        << attr(kWidth - kRight) << "' y2='" << attr(py(0))
        << "' stroke='#999' stroke-dasharray='4 3'/>\n";
    for (size_t g = 0; g < n_groups; ++g) {
        svg << "<text x='" << attr(px(static_cast<double>(g))) << "' y='"
            << attr(kHeight - kBottom + 18) << "' text-anchor='middle' font-size='12'>"
            << group_labels[g] << "</text>\n";
    }

    // Deterministic horizontal spread within each column.
    std::vector<int> counter(n_groups, 0);
    for (const auto& [g, v] : points) {
        const int i = counter[static_cast<size_t>(g)]++;
        const double jitter = ((i * 37) % 21 - 10) / 10.0 * plot_w / (4.0 * n_groups);
        svg << "<circle cx='" << attr(px(g) + jitter) << "' cy='" << attr(py(v))
            << "' r='2.4' fill='" << kPalette[static_cast<size_t>(g) % 6]
            << "' fill-opacity='0.6'/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace recur
