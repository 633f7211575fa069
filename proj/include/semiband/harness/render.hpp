#pragma once

// Minimal SVG line charts from numeric CSV columns (regret vs t, ratio vs
// lambda_q0). No external dependencies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace semiband {

struct CsvColumns {
    std::vector<std::string> names;
    std::vector<std::vector<double>> values; ///< one vector per column

    std::size_t index_of(const std::string& name) const
    {
        for (std::size_t k = 0; k < names.size(); ++k)
            if (names[k] == name)
                return k;
        throw std::invalid_argument("no column named '" + name + "'");
    }
};

/// Reads a header line and numeric rows; non-numeric cells become NaN.
inline CsvColumns read_numeric_csv(std::istream& in)
{
    CsvColumns out;
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("render: empty CSV input");
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (!s.empty() && s.back() == ',')
            cells.emplace_back();
        return cells;
    };
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    out.names = split(line);
    out.values.resize(out.names.size());
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto cells = split(line);
        for (std::size_t k = 0; k < out.names.size(); ++k) {
            double v = NAN;
            if (k < cells.size() && !cells[k].empty()) {
                try {
                    std::size_t used = 0;
                    v = std::stod(cells[k], &used);
                    if (used != cells[k].size())
                        v = NAN;
                } catch (const std::exception&) {
                    v = NAN;
                }
            }
            out.values[k].push_back(v);
        }
    }
    return out;
}

struct ChartSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 720;
    int height = 440;
};

namespace detail {

inline std::string svg_escape(const std::string& s)
{
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

inline std::string fmt_tick(double v)
{
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

} // namespace detail

inline std::string render_line_chart(const std::vector<ChartSeries>& series, const ChartOptions& opt = {})
{
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k)
            if (std::isfinite(s.x[k]) && std::isfinite(s.y[k])) {
                x0 = std::min(x0, s.x[k]);
                x1 = std::max(x1, s.x[k]);
                y0 = std::min(y0, s.y[k]);
                y1 = std::max(y1, s.y[k]);
            }
    if (!(x0 <= x1))
        throw std::invalid_argument("render: no finite points to plot");
    if (x0 == x1) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (y0 == y1) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    const double left = 70, right = 20, top = 40, bottom = 55;
    const double pw = opt.width - left - right;
    const double ph = opt.height - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opt.title.empty())
        os << "<text x=\"" << opt.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
           << detail::svg_escape(opt.title) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = x0 + (x1 - x0) * k / 5.0;
        const double yv = y0 + (y1 - y0) * k / 5.0;
        os << "<line x1=\"" << px(xv) << "\" y1=\"" << top + ph << "\" x2=\"" << px(xv) << "\" y2=\"" << top + ph + 5
           << "\" stroke=\"#444\"/>\n";
        os << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
           << detail::fmt_tick(xv) << "</text>\n";
        os << "<line x1=\"" << left - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << left + pw << "\" y2=\"" << py(yv)
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << left - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
           << detail::fmt_tick(yv) << "</text>\n";
    }
    if (!opt.x_label.empty())
        os << "<text x=\"" << left + pw / 2 << "\" y=\"" << opt.height - 12 << "\" text-anchor=\"middle\">"
           << detail::svg_escape(opt.x_label) << "</text>\n";
    if (!opt.y_label.empty())
        os << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
           << detail::svg_escape(opt.y_label) << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* colour = palette[si % std::size(palette)];
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k)
            if (std::isfinite(s.x[k]) && std::isfinite(s.y[k]))
                os << px(s.x[k]) << ',' << py(s.y[k]) << ' ';
        os << "\"/>\n";
        if (!s.label.empty())
            os << "<text x=\"" << left + 10 << "\" y=\"" << top + 16 + 16 * static_cast<double>(si) << "\" fill=\""
               << colour << "\">" << detail::svg_escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace semiband
