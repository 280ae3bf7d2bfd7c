#pragma once

#include "spotrack/identify.hpp"
#include "spotrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace spotrack {

namespace detail {

inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace detail

/// One evaluated (sequence, engine) pair.
struct EvaluationRow {
    std::string sequence;
    std::string engine;
    TgospaReport tgospa;
    std::size_t cardinality_mismatch = 0;
};

[[nodiscard]] inline std::string evaluation_csv(const std::vector<EvaluationRow>& rows) {
    std::string out = "sequence,engine,tgospa,localization,tp,fn,fp,switches,cardinality_mismatch\n";
    for (const auto& r : rows) {
        out += r.sequence + "," + r.engine + "," + detail::fmt("%.6f", r.tgospa.total) + "," +
               detail::fmt("%.6f", r.tgospa.localization) + "," + detail::fmt("%.6g", r.tgospa.tp) + "," +
               detail::fmt("%.6g", r.tgospa.fn) + "," + detail::fmt("%.6g", r.tgospa.fp) + "," +
               detail::fmt("%.6g", r.tgospa.switches) + "," + std::to_string(r.cardinality_mismatch) + "\n";
    }
    return out;
}

struct DetectionStatsRow {
    std::string sequence;
    DetectionStats stats;
};

[[nodiscard]] inline std::string detection_stats_csv(const std::vector<DetectionStatsRow>& rows) {
    std::string out = "sequence,gt,matched,clutter,frames,p_d,lambda";
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) out += ",r" + std::to_string(i) + std::to_string(j);
    out += "\n";
    for (const auto& r : rows) {
        const auto& s = r.stats;
        out += r.sequence + "," + std::to_string(s.gt_count) + "," + std::to_string(s.matched) + "," +
               std::to_string(s.clutter) + "," + std::to_string(s.frames) + "," +
               detail::fmt("%.6f", s.detection_probability) + "," + detail::fmt("%.6f", s.clutter_rate);
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) out += "," + detail::fmt("%.6e", s.noise_shape(i, j));
        out += "\n";
    }
    return out;
}

/// Empty bins are written with an empty p_d field.
[[nodiscard]] inline std::string visibility_csv(const std::vector<VisibilityBin>& bins) {
    std::string out = "lower,upper,count,detected,p_d\n";
    for (const auto& b : bins) {
        const auto pd = b.detection_probability();
        out += detail::fmt("%.4f", b.lower) + "," + detail::fmt("%.4f", b.upper) + "," + std::to_string(b.count) +
               "," + std::to_string(b.detected) + "," + (pd ? detail::fmt("%.6f", *pd) : std::string()) + "\n";
    }
    return out;
}

struct PopulationRow {
    std::string sequence;
    PopulationStats stats;
};

[[nodiscard]] inline std::string population_csv(const std::vector<PopulationRow>& rows) {
    std::string out = "sequence,objects,frames,mean_n,var_n,L,eta,L_eta\n";
    for (const auto& r : rows) {
        const auto& s = r.stats;
        out += r.sequence + "," + std::to_string(s.objects) + "," + std::to_string(s.frames) + "," +
               detail::fmt("%.3f", s.mean_count) + "," + detail::fmt("%.3f", s.var_count) + "," +
               detail::fmt("%.3f", s.mean_lifespan) + "," + detail::fmt("%.3f", s.birth_rate) + "," +
               detail::fmt("%.3f", s.stationary_mean()) + "\n";
    }
    return out;
}

/// Grouped bar chart: one group per category, one bar per series.
struct BarChart {
    std::string title;
    std::vector<std::string> categories;
    std::map<std::string, std::vector<double>> series;
};

[[nodiscard]] inline std::string bar_chart_svg(const BarChart& chart) {
    const double width = 160.0 + 90.0 * static_cast<double>(std::max<std::size_t>(chart.categories.size(), 1));
    const double height = 360.0, left = 70.0, top = 40.0, bottom = 60.0;
    const double plot_h = height - top - bottom;
    double vmax = 0.0;
    for (const auto& [name, v] : chart.series)
        for (double x : v) vmax = std::max(vmax, x);
    if (vmax <= 0.0) vmax = 1.0;
    static const char* palette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt("%.0f", width) +
                    "\" height=\"" + detail::fmt("%.0f", height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s += "<text x=\"" + detail::fmt("%.1f", width / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         detail::xml_escape(chart.title) + "</text>\n";
    s += "<line x1=\"" + detail::fmt("%.1f", left) + "\" y1=\"" + detail::fmt("%.1f", top + plot_h) + "\" x2=\"" +
         detail::fmt("%.1f", width - 80) + "\" y2=\"" + detail::fmt("%.1f", top + plot_h) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = vmax * t / 4.0;
        const double y = top + plot_h * (1.0 - t / 4.0);
        s += "<text x=\"" + detail::fmt("%.1f", left - 6) + "\" y=\"" + detail::fmt("%.1f", y + 4) +
             "\" text-anchor=\"end\">" + detail::fmt("%.4g", v) + "</text>\n";
    }
    const std::size_t ns = std::max<std::size_t>(chart.series.size(), 1);
    const double group_w = 90.0, bar_w = 70.0 / static_cast<double>(ns);
    for (std::size_t c = 0; c < chart.categories.size(); ++c) {
        const double gx = left + 10.0 + group_w * static_cast<double>(c);
        std::size_t si = 0;
        for (const auto& [name, v] : chart.series) {
            const double val = c < v.size() ? v[c] : 0.0;
            const double h = plot_h * val / vmax;
            s += "<rect x=\"" + detail::fmt("%.1f", gx + bar_w * static_cast<double>(si)) + "\" y=\"" +
                 detail::fmt("%.1f", top + plot_h - h) + "\" width=\"" + detail::fmt("%.1f", bar_w - 2) +
                 "\" height=\"" + detail::fmt("%.1f", h) + "\" fill=\"" + palette[si % 6] + "\"/>\n";
            ++si;
        }
        s += "<text x=\"" + detail::fmt("%.1f", gx + 35) + "\" y=\"" + detail::fmt("%.1f", top + plot_h + 16) +
             "\" text-anchor=\"middle\">" + detail::xml_escape(chart.categories[c]) + "</text>\n";
    }
    std::size_t si = 0;
    for (const auto& [name, v] : chart.series) {
        const double y = top + 14.0 * static_cast<double>(si);
        s += "<rect x=\"" + detail::fmt("%.1f", width - 72) + "\" y=\"" + detail::fmt("%.1f", y) +
             "\" width=\"10\" height=\"10\" fill=\"" + palette[si % 6] + "\"/>\n";
        s += "<text x=\"" + detail::fmt("%.1f", width - 58) + "\" y=\"" + detail::fmt("%.1f", y + 9) + "\">" +
             detail::xml_escape(name) + "</text>\n";
        ++si;
    }
    s += "</svg>\n";
    return s;
}

}  // namespace spotrack
