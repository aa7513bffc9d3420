#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "nlsp/errors.hpp"

namespace nlsp {

// Minimal line-plot renderer: one series per method with a shaded quartile
// band. Diagnostic output, nothing more.
struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;      // median line
    std::vector<double> y_low;  // optional band
    std::vector<double> y_high;
};

class SvgLinePlot {
public:
    SvgLinePlot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    void add_series(SvgSeries s) { series_.push_back(std::move(s)); }

    void save(const std::string& path) const {
        if (series_.empty()) throw ValidationError("svg: nothing to plot");
        double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
        for (const auto& s : series_) {
            for (double v : s.x) {
                x_min = std::min(x_min, v);
                x_max = std::max(x_max, v);
            }
            auto scan = [&](const std::vector<double>& ys) {
                for (double v : ys) {
                    y_min = std::min(y_min, v);
                    y_max = std::max(y_max, v);
                }
            };
            scan(s.y);
            scan(s.y_low);
            scan(s.y_high);
        }
        if (x_max <= x_min) x_max = x_min + 1.0;
        if (y_max <= y_min) y_max = y_min + 1.0;
        const double pad_y = 0.05 * (y_max - y_min);
        y_min -= pad_y;
        y_max += pad_y;

        const double w = 640.0, h = 420.0, ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;
        auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (w - ml - mr); };
        auto py = [&](double y) { return h - mb - (y - y_min) / (y_max - y_min) * (h - mt - mb); };

        std::ofstream out(path);
        if (!out) throw IoError("cannot open for write: " + path);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
            << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
        out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
            << title_ << "</text>\n";
        // axes
        out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
            << h - mb << "\" stroke=\"black\"/>\n";
        out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
            << h - mb << "\" stroke=\"black\"/>\n";
        for (int tick = 0; tick <= 4; ++tick) {
            const double xv = x_min + (x_max - x_min) * tick / 4.0;
            const double yv = y_min + (y_max - y_min) * tick / 4.0;
            out << "<text x=\"" << px(xv) << "\" y=\"" << h - mb + 18
                << "\" text-anchor=\"middle\" font-size=\"11\">" << format_number(xv)
                << "</text>\n";
            out << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
                << "\" text-anchor=\"end\" font-size=\"11\">" << format_number(yv)
                << "</text>\n";
        }
        out << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
            << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label_ << "</text>\n";
        out << "<text x=\"16\" y=\"" << (mt + h - mb) / 2
            << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
            << (mt + h - mb) / 2 << ")\">" << y_label_ << "</text>\n";

        double legend_y = mt + 6.0;
        for (const auto& s : series_) {
            if (!s.y_low.empty() && s.y_low.size() == s.x.size() &&
                s.y_high.size() == s.x.size()) {
                out << "<path d=\"M";
                for (std::size_t i = 0; i < s.x.size(); ++i)
                    out << (i ? " L" : "") << px(s.x[i]) << ' ' << py(s.y_low[i]);
                for (std::size_t i = s.x.size(); i-- > 0;)
                    out << " L" << px(s.x[i]) << ' ' << py(s.y_high[i]);
                out << " Z\" fill=\"" << s.color << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
            }
            out << "<polyline points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            out << "\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\"/>\n";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
                    << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
            out << "<rect x=\"" << w - mr - 130 << "\" y=\"" << legend_y - 9
                << "\" width=\"14\" height=\"4\" fill=\"" << s.color << "\"/>\n";
            out << "<text x=\"" << w - mr - 110 << "\" y=\"" << legend_y
                << "\" font-size=\"12\">" << s.label << "</text>\n";
            legend_y += 16.0;
        }
        out << "</svg>\n";
        if (!out) throw IoError("write failed: " + path);
    }

private:
    static std::string format_number(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4g", v);
        return std::string(buf);
    }

    std::string title_;
    std::string x_label_;
    std::string y_label_;
    std::vector<SvgSeries> series_;
};

} // namespace nlsp
