#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ofm/detail/format.hpp"
#include "ofm/metrics.hpp"

namespace ofm {

/// Tab-separated plot tables derived from a report. All tables have a header
/// row, LF line endings, shortest round-trip floats and "inf" for infinite
/// values, so downstream recomputation from them is lossless.
struct PlotData {
    std::string curves;     // step, pretext, target, target_measured
    std::string mismatch;   // step, m3, sm3, ofm   (m3 empty when skipped)
    std::string normalized; // step, normalized, shifted
    std::string chart_svg;  // self-contained vector chart of the same curves
};

namespace detail {

inline std::string tsv_value(const MismatchValue& v) {
    return v.infinite ? "inf" : format_shortest(v.value);
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

inline std::string svg_polyline(const std::vector<double>& xs,
                                const std::vector<double>& ys, double x0, double x1,
                                double y0, double y1, double w, double h,
                                const char* color) {
    std::string p = "<polyline fill=\"none\" stroke=\"";
    p += color;
    p += "\" stroke-width=\"1.5\" points=\"";
    const double xr = x1 > x0 ? x1 - x0 : 1.0;
    const double yr = y1 > y0 ? y1 - y0 : 1.0;
    char buf[64];
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double px = 50.0 + (xs[i] - x0) / xr * (w - 70.0);
        const double py = h - 30.0 - (ys[i] - y0) / yr * (h - 60.0);
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px, py);
        p += buf;
    }
    p += "\"/>\n";
    return p;
}

} // namespace detail

inline PlotData emit_plot_data(const MismatchReport& rep) {
    PlotData out;

    out.curves = "step\tpretext\ttarget\ttarget_measured\n";
    for (std::size_t i = 0; i < rep.n; ++i) {
        out.curves += std::to_string(rep.steps[i]);
        out.curves += '\t';
        out.curves += detail::format_shortest(rep.pretext_curve[i]);
        out.curves += '\t';
        out.curves += detail::format_shortest(rep.target_curve[i]);
        out.curves += '\t';
        out.curves += rep.target_measured[i] ? '1' : '0';
        out.curves += '\n';
    }

    out.mismatch = "step\tm3\tsm3\tofm\n";
    for (std::size_t i = 0; i < rep.n; ++i) {
        out.mismatch += std::to_string(rep.steps[i]);
        out.mismatch += '\t';
        if (rep.m3_available) out.mismatch += detail::format_shortest(rep.m3[i]);
        out.mismatch += '\t';
        out.mismatch += detail::format_shortest(rep.sm3[i]);
        out.mismatch += '\t';
        out.mismatch += detail::tsv_value(rep.ofm[i]);
        out.mismatch += '\n';
    }

    // Normalized target values, plus the same values shifted by the curve
    // minimum so finite curves land in [0, 100] for plotting. The shift is
    // visualization-only and never feeds metric math.
    out.normalized = "step\tnormalized\tshifted\n";
    std::vector<double> norm_values(rep.n, 0.0);
    std::vector<bool> norm_infinite(rep.n, false);
    if (rep.normalization.infinite) {
        bool forgotten = false;
        for (std::size_t i = 0; i < rep.n; ++i) {
            if (rep.target_curve[i] > rep.normalization.baseline) forgotten = true;
            norm_infinite[i] = forgotten;
        }
    } else if (rep.normalization.has_scale) {
        for (std::size_t i = 0; i < rep.n; ++i)
            norm_values[i] = rep.target_curve[i] * rep.normalization.scale;
    }
    double norm_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.n; ++i)
        if (!norm_infinite[i]) norm_min = std::min(norm_min, norm_values[i]);
    if (!std::isfinite(norm_min)) norm_min = 0.0;
    for (std::size_t i = 0; i < rep.n; ++i) {
        out.normalized += std::to_string(rep.steps[i]);
        out.normalized += '\t';
        if (norm_infinite[i]) {
            out.normalized += "inf\tinf\n";
        } else {
            out.normalized += detail::format_shortest(norm_values[i]);
            out.normalized += '\t';
            out.normalized += detail::format_shortest(norm_values[i] - norm_min);
            out.normalized += '\n';
        }
    }

    // Chart: pretext and target curves over steps, OFM curve beneath.
    const double w = 640.0, h = 360.0;
    std::vector<double> xs(rep.n);
    for (std::size_t i = 0; i < rep.n; ++i) xs[i] = static_cast<double>(rep.steps[i]);
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (double v : rep.pretext_curve) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
    for (double v : rep.target_curve) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
                      "height=\"360\" viewBox=\"0 0 640 360\">\n"
                      "<rect width=\"640\" height=\"360\" fill=\"white\"/>\n"
                      "<text x=\"50\" y=\"20\" font-size=\"12\">run ";
    svg += detail::xml_escape(rep.run_id);
    svg += " (blue: pretext, red: target, gray: ofm rescaled)</text>\n";
    svg += detail::svg_polyline(xs, rep.pretext_curve, xs.front(), xs.back(), ymin, ymax,
                                w, h, "#1f77b4");
    svg += detail::svg_polyline(xs, rep.target_curve, xs.front(), xs.back(), ymin, ymax,
                                w, h, "#d62728");
    std::vector<double> ofm_finite(rep.n, 0.0);
    double omax = 1.0;
    for (std::size_t i = 0; i < rep.n; ++i)
        if (!rep.ofm[i].infinite) omax = std::max(omax, rep.ofm[i].value);
    for (std::size_t i = 0; i < rep.n; ++i)
        ofm_finite[i] = rep.ofm[i].infinite ? omax : rep.ofm[i].value;
    svg += detail::svg_polyline(xs, ofm_finite, xs.front(), xs.back(), 0.0, omax, w, h,
                                "#7f7f7f");
    svg += "</svg>\n";
    out.chart_svg = svg;
    return out;
}

} // namespace ofm
