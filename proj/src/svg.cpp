#include "chartml/svg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "chartml/error.hpp"

namespace chartml::svg {

namespace {

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c; break;
        }
    }
    return out;
}

// diverging blue (-1) .. white (0) .. red (+1)
std::string diverging_color(double v) {
    v = std::clamp(v, -1.0, 1.0);
    int r;
    int g;
    int b;
    if (v < 0) {
        double t = -v;
        r = static_cast<int>(std::lround(255.0 + t * (33.0 - 255.0)));
        g = static_cast<int>(std::lround(255.0 + t * (102.0 - 255.0)));
        b = static_cast<int>(std::lround(255.0 + t * (172.0 - 255.0)));
    } else {
        r = static_cast<int>(std::lround(255.0 + v * (178.0 - 255.0)));
        g = static_cast<int>(std::lround(255.0 + v * (24.0 - 255.0)));
        b = static_cast<int>(std::lround(255.0 + v * (43.0 - 255.0)));
    }
    return fmt::format("#{:02X}{:02X}{:02X}", r, g, b);
}

constexpr const char* kFont = "font-family=\"Helvetica, Arial, sans-serif\"";

}  // namespace

std::string bar_chart(std::span<const std::pair<std::string, double>> items,
                      const std::string& title) {
    if (items.empty()) throw ValueError("bar chart needs at least one item");

    const double bar_height = 22.0;
    const double bar_gap = 8.0;
    const double label_width = 170.0;
    const double plot_width = 560.0;
    const double top = 50.0;
    const double width = label_width + plot_width + 90.0;
    const double height = top + static_cast<double>(items.size()) * (bar_height + bar_gap) + 20.0;

    double max_value = 0.0;
    for (const auto& [name, value] : items) max_value = std::max(max_value, value);
    if (max_value <= 0.0) max_value = 1.0;

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
        "viewBox=\"0 0 {:.0f} {:.0f}\">\n",
        width, height, width, height);
    out += fmt::format("  <rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"#ffffff\"/>\n",
                       width, height);
    out += fmt::format(
        "  <text x=\"{:.1f}\" y=\"28\" text-anchor=\"middle\" {} font-size=\"18\" "
        "font-weight=\"bold\">{}</text>\n",
        width / 2.0, kFont, xml_escape(title));

    for (std::size_t i = 0; i < items.size(); ++i) {
        double y = top + static_cast<double>(i) * (bar_height + bar_gap);
        double w = plot_width * items[i].second / max_value;
        out += fmt::format(
            "  <text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\" {} font-size=\"13\">{}</text>\n",
            label_width - 8.0, y + bar_height - 6.0, kFont, xml_escape(items[i].first));
        out += fmt::format(
            "  <rect class=\"bar\" x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.2f}\" height=\"{:.1f}\" "
            "fill=\"#3372B5\"/>\n",
            label_width, y, std::max(w, 0.0), bar_height);
        out += fmt::format(
            "  <text x=\"{:.2f}\" y=\"{:.1f}\" {} font-size=\"12\" fill=\"#333333\">{:.4f}</text>\n",
            label_width + std::max(w, 0.0) + 6.0, y + bar_height - 6.0, kFont, items[i].second);
    }
    out += "</svg>\n";
    return out;
}

std::string heatmap(const Matrix& values, std::span<const std::string> labels,
                    const std::string& title) {
    std::size_t p = values.rows();
    if (p == 0 || values.cols() != p) throw ValueError("heatmap needs a non-empty square matrix");
    if (labels.size() != p) throw ValueError("heatmap label count does not match the matrix");

    const double cell = 46.0;
    const double left = 150.0;
    const double top = 140.0;
    const double width = left + static_cast<double>(p) * cell + 30.0;
    const double height = top + static_cast<double>(p) * cell + 30.0;

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
        "viewBox=\"0 0 {:.0f} {:.0f}\">\n",
        width, height, width, height);
    out += fmt::format("  <rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"#ffffff\"/>\n",
                       width, height);
    out += fmt::format(
        "  <text x=\"{:.1f}\" y=\"30\" text-anchor=\"middle\" {} font-size=\"18\" "
        "font-weight=\"bold\">{}</text>\n",
        width / 2.0, kFont, xml_escape(title));

    for (std::size_t j = 0; j < p; ++j) {
        double x = left + (static_cast<double>(j) + 0.5) * cell;
        out += fmt::format(
            "  <text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"start\" {} font-size=\"11\" "
            "transform=\"rotate(-60 {:.1f} {:.1f})\">{}</text>\n",
            x, top - 8.0, kFont, x, top - 8.0, xml_escape(labels[j]));
    }
    for (std::size_t i = 0; i < p; ++i) {
        double y = top + (static_cast<double>(i) + 0.5) * cell;
        out += fmt::format(
            "  <text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\" {} font-size=\"11\">{}</text>\n",
            left - 8.0, y + 4.0, kFont, xml_escape(labels[i]));
        for (std::size_t j = 0; j < p; ++j) {
            double x = left + static_cast<double>(j) * cell;
            double v = values(i, j);
            out += fmt::format(
                "  <rect class=\"cell\" x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" "
                "fill=\"{}\" stroke=\"#dddddd\"/>\n",
                x, top + static_cast<double>(i) * cell, cell, cell, diverging_color(v));
            out += fmt::format(
                "  <text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" {} font-size=\"10\" "
                "fill=\"{}\">{:.2f}</text>\n",
                x + cell / 2.0, y + 3.5, kFont, std::fabs(v) > 0.6 ? "#ffffff" : "#222222", v);
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace chartml::svg
