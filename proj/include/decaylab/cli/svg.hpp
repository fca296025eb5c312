#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "decaylab/decay/report.hpp"
#include "decaylab/timestep.hpp"

namespace decaylab {

namespace detail {

inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace detail

/// Log-log plot of every ell-series (t > 0 samples) with a dashed guide of
/// the predicted rate, anchored at twice the first sample of the fit window
/// so it does not hide the data. Exponential guides use the fitted 1/C since
/// the catalog gives no C.
inline std::string decay_plot_svg(const NormSeries& series, const std::vector<Report>& reports) {
    constexpr double W = 720, H = 480, left = 70, right = 20, top = 30, bottom = 50;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    double tmin = std::numeric_limits<double>::infinity(), tmax = 0.0;
    double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
    for (std::size_t k = 0; k < series.ells.size(); ++k)
        for (std::size_t i = 0; i < series.times.size(); ++i) {
            const double t = series.times[i], y = series.norms[k][i];
            if (!(t > 0.0 && y > 0.0)) continue;
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" viewBox=\"0 0 720 480\">\n";
    svg += "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
    if (!(tmax > tmin && ymax > ymin)) {
        svg += "<text x=\"360\" y=\"240\" text-anchor=\"middle\" font-family=\"sans-serif\">no positive samples to plot</text>\n</svg>\n";
        return svg;
    }
    const double lx0 = std::floor(std::log10(tmin)), lx1 = std::ceil(std::log10(tmax));
    const double ly0 = std::floor(std::log10(ymin)), ly1 = std::ceil(std::log10(ymax));
    auto X = [&](double t) { return left + (std::log10(t) - lx0) / (lx1 - lx0) * (W - left - right); };
    auto Y = [&](double y) { return top + (ly1 - std::log10(y)) / (ly1 - ly0) * (H - top - bottom); };
    using detail::fmt;

    svg += "<g font-family=\"sans-serif\" font-size=\"11\" stroke=\"#ccc\">\n";
    const int ystep = std::max(1, static_cast<int>(std::ceil((ly1 - ly0) / 10.0)));
    for (double e = lx0; e <= lx1; ++e)
        svg += "<line x1=\"" + fmt("%.2f", X(std::pow(10.0, e))) + "\" y1=\"" + fmt("%.2f", top) + "\" x2=\"" +
               fmt("%.2f", X(std::pow(10.0, e))) + "\" y2=\"" + fmt("%.2f", H - bottom) + "\"/>\n" +
               "<text stroke=\"none\" x=\"" + fmt("%.2f", X(std::pow(10.0, e))) + "\" y=\"" + fmt("%.2f", H - bottom + 16) +
               "\" text-anchor=\"middle\">1e" + fmt("%.0f", e) + "</text>\n";
    for (double e = ly0; e <= ly1; e += ystep)
        svg += "<line x1=\"" + fmt("%.2f", left) + "\" y1=\"" + fmt("%.2f", Y(std::pow(10.0, e))) + "\" x2=\"" +
               fmt("%.2f", W - right) + "\" y2=\"" + fmt("%.2f", Y(std::pow(10.0, e))) + "\"/>\n" +
               "<text stroke=\"none\" x=\"" + fmt("%.2f", left - 6) + "\" y=\"" + fmt("%.2f", Y(std::pow(10.0, e)) + 4) +
               "\" text-anchor=\"end\">1e" + fmt("%.0f", e) + "</text>\n";
    svg += "</g>\n";
    svg += "<text x=\"" + fmt("%.2f", (W + left) / 2) + "\" y=\"" + fmt("%.2f", H - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">t</text>\n";
    svg += "<text x=\"16\" y=\"" + fmt("%.2f", (H - bottom + top) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
           fmt("%.2f", (H - bottom + top) / 2) + ")\">|u(t)|_ell</text>\n";

    for (std::size_t k = 0; k < series.ells.size(); ++k) {
        const char* colour = palette[k % 6];
        std::string pts;
        for (std::size_t i = 0; i < series.times.size(); ++i) {
            const double t = series.times[i], y = series.norms[k][i];
            if (!(t > 0.0 && y > 0.0)) continue;
            pts += fmt("%.2f", X(t)) + "," + fmt("%.2f", Y(y)) + " ";
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";

        std::string label = "ell = " + fmt("%g", series.ells[k]);
        if (k < reports.size() && reports[k].fitted && reports[k].predicted.supported()) {
            const auto& rep = reports[k];
            const auto& fit = *rep.fitted;
            std::size_t i0 = 0;
            while (i0 < series.times.size() && series.times[i0] < fit.window.t0) ++i0;
            if (i0 < series.times.size() && series.norms[k][i0] > 0.0) {
                const double t0 = series.times[i0], y0 = 2.0 * series.norms[k][i0];
                const bool poly = rep.predicted.form == RateForm::polynomial;
                const double rate = poly ? rep.predicted.exponent : fit.rate;
                std::string guide;
                for (int j = 0; j <= 40; ++j) {
                    const double t = t0 * std::pow(tmax / t0, j / 40.0);
                    const double y = poly ? y0 * std::pow(t / t0, -rate) : y0 * std::exp(-rate * (t - t0));
                    if (y < std::pow(10.0, ly0)) break;
                    if (y > std::pow(10.0, ly1)) continue;
                    guide += fmt("%.2f", X(t)) + "," + fmt("%.2f", Y(y)) + " ";
                }
                svg += "<polyline fill=\"none\" stroke=\"" + std::string(colour) +
                       "\" stroke-width=\"1\" stroke-dasharray=\"6 4\" points=\"" + guide + "\"/>\n";
                label += poly ? ", guide 2x t^-" + fmt("%.4g", rate) : ", guide 2x e^{-t/C}, C fitted";
            }
        }
        svg += "<text x=\"" + fmt("%.2f", W - right - 8) + "\" y=\"" + fmt("%.2f", top + 14 + 14.0 * k) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + colour + "\">" +
               detail::xml_escape(label) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace decaylab
