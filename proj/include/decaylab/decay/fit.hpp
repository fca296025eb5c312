#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "decaylab/decay/catalog.hpp"
#include "decaylab/error.hpp"
#include "decaylab/timestep.hpp"

namespace decaylab {

struct FitWindow {
    double t0 = 0.0;
    double t1 = std::numeric_limits<double>::infinity();
};

struct FitResult {
    RateForm form = RateForm::polynomial;  // polynomial or exponential
    double rate = 0.0;                     // beta of t^-beta, or r = 1/C of e^{-r t}
    double stderr_rate = 0.0;
    FitWindow window;
    double r2 = 0.0;
    double r2_polynomial = 0.0;
    double r2_exponential = 0.0;
    double rate_polynomial = 0.0;
    double rate_exponential = 0.0;
    int samples = 0;
};

inline constexpr int min_fit_samples = 20;
inline constexpr double exponential_r2_margin = 0.02;
inline constexpr double underflow_fraction = 1e-13;

namespace detail {

struct LineFit {
    double slope = 0.0, intercept = 0.0, stderr_slope = 0.0, r2 = 1.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    require(sxx > 0.0, "fit window has no spread in the abscissa");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ssr += r * r;
    }
    f.r2 = syy > 0.0 ? std::max(0.0, 1.0 - ssr / syy) : 1.0;
    f.stderr_slope = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
    return f;
}

}  // namespace detail

/// [max(1, T/10), T_pos], T_pos the last time whose norm is at least 1e-13
/// of the initial one. When fewer than 20 samples fall in that range, t0 is
/// pulled back so that the last 20 positive-time samples up to T_pos are used.
inline FitWindow default_window(const std::vector<double>& times, const std::vector<double>& norms) {
    require(!times.empty() && times.size() == norms.size(), "series is empty or inconsistent");
    const double floor = underflow_fraction * norms.front();
    std::size_t last = 0;
    for (std::size_t k = 0; k < norms.size(); ++k)
        if (norms[k] > floor && norms[k] > 0.0) last = k;
    FitWindow w{std::max(1.0, times.back() / 10.0), times[last]};
    std::vector<std::size_t> positive;
    for (std::size_t k = 0; k <= last; ++k)
        if (times[k] > 0.0) positive.push_back(k);
    const auto inside = std::count_if(positive.begin(), positive.end(),
                                      [&](std::size_t k) { return times[k] >= w.t0 && times[k] <= w.t1; });
    if (inside < min_fit_samples && positive.size() >= static_cast<std::size_t>(min_fit_samples))
        w.t0 = times[positive[positive.size() - min_fit_samples]];
    return w;
}

/// Least-squares decay rate of (t, |u|) samples. The polynomial candidate
/// fits log|u| against log t, the exponential one log|u| against t; the
/// exponential wins only if its R^2 exceeds the polynomial one by 0.02.
inline FitResult fit_rate(const std::vector<double>& times, const std::vector<double>& norms,
                          std::optional<FitWindow> window = std::nullopt) {
    require(times.size() == norms.size(), "times and norms differ in length");
    for (std::size_t k = 1; k < times.size(); ++k) require(times[k] > times[k - 1], "times must be strictly increasing");
    const FitWindow w = window ? *window : default_window(times, norms);
    std::vector<double> t, logt, logu;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < w.t0 || times[k] > w.t1) continue;
        require(times[k] > 0.0, "fit window must start at t > 0");
        require(norms[k] > 0.0, "zero norm at t = " + std::to_string(times[k]) + " inside the fit window");
        t.push_back(times[k]);
        logt.push_back(std::log(times[k]));
        logu.push_back(std::log(norms[k]));
    }
    require(t.size() >= static_cast<std::size_t>(min_fit_samples),
            "fit window [" + std::to_string(w.t0) + ", " + std::to_string(w.t1) + "] holds " +
                std::to_string(t.size()) + " samples, need " + std::to_string(min_fit_samples));

    const auto poly = detail::least_squares(logt, logu);
    const auto expo = detail::least_squares(t, logu);
    FitResult r;
    r.window = {t.front(), t.back()};
    r.samples = static_cast<int>(t.size());
    r.r2_polynomial = poly.r2;
    r.r2_exponential = expo.r2;
    r.rate_polynomial = -poly.slope;
    r.rate_exponential = -expo.slope;
    const bool exponential = expo.r2 > poly.r2 + exponential_r2_margin;
    const auto& best = exponential ? expo : poly;
    r.form = exponential ? RateForm::exponential : RateForm::polynomial;
    r.rate = -best.slope;
    r.stderr_rate = best.stderr_slope;
    r.r2 = best.r2;
    return r;
}

inline FitResult fit_rate(const NormSeries& series, double ell, std::optional<FitWindow> window = std::nullopt) {
    return fit_rate(series.times, series.norm(ell), window);
}

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "PASS";
        case Verdict::fail: return "FAIL";
        case Verdict::inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

inline constexpr double default_rate_tolerance = 0.15;

struct Judgement {
    Verdict verdict = Verdict::inconclusive;
    double relative_error = std::numeric_limits<double>::quiet_NaN();
    std::string note;
};

/// Compares a fit against a prediction. Exponential predictions are judged
/// on form only because C in e^{-t/C} is never given.
inline Judgement judge(const DecayPrediction& pred, const FitResult& fit, double tol_rel = default_rate_tolerance) {
    Judgement j;
    if (!pred.supported()) {
        j.note = "no prediction: " + pred.reason;
        return j;
    }
    if (fit.form != pred.form) {
        j.verdict = Verdict::fail;
        j.note = std::string("form mismatch: predicted ") + to_string(pred.form) + ", fitted " + to_string(fit.form);
    } else if (pred.form == RateForm::exponential) {
        j.verdict = Verdict::pass;
        j.note = "exponential form matches; fitted 1/C = " + std::to_string(fit.rate) + " is reported, not judged";
    } else {
        j.relative_error = std::abs(fit.rate - pred.exponent) / pred.exponent;
        char buf[200];
        std::snprintf(buf, sizeof buf, "beta_hat = %.6g +- %.2g vs beta = %.6g: relative error %.4g, tolerance %.4g",
                      fit.rate, fit.stderr_rate, pred.exponent, j.relative_error, tol_rel);
        j.note = buf;
        if (j.relative_error <= tol_rel)
            j.verdict = Verdict::pass;
        else if (std::abs(fit.rate - pred.exponent) <= 2.0 * fit.stderr_rate)
            j.verdict = Verdict::inconclusive;
        else
            j.verdict = Verdict::fail;
    }
    if (pred.ambiguous) {
        j.note = std::string("ambiguous table row, not scored (would be ") + to_string(j.verdict) + "): " + j.note;
        j.verdict = Verdict::inconclusive;
    }
    return j;
}

/// How well the trajectory satisfies |u|^{ell-1+gamma} <= C D with D the
/// dissipation pairing. gamma_hat is the slope of log D against log |u|
/// minus (ell - 1); C_hat is the smallest constant making the inequality
/// hold at every sample with D > 0 for that gamma_hat.
struct DissipationDiagnostic {
    int samples = 0;
    int positive = 0;
    int nonpositive = 0;
    double fraction_nonpositive = 0.0;
    std::optional<double> gamma_hat;
    std::optional<double> C_hat;
    /// Laplacian at ell = 2 only: gamma_hat >= 0.95.
    std::optional<bool> poincare_ok;
};

inline DissipationDiagnostic check_dissipation_inequality(const std::vector<double>& norms,
                                                          const std::vector<double>& dissipation, double ell) {
    require(norms.size() == dissipation.size(), "norms and dissipation differ in length");
    DissipationDiagnostic d;
    std::vector<double> x, y;
    for (std::size_t k = 0; k < norms.size(); ++k) {
        if (!(norms[k] > 0.0)) continue;
        ++d.samples;
        if (dissipation[k] > 0.0) {
            ++d.positive;
            x.push_back(std::log(norms[k]));
            y.push_back(std::log(dissipation[k]));
        } else {
            ++d.nonpositive;
        }
    }
    if (d.samples == 0) return d;
    d.fraction_nonpositive = static_cast<double>(d.nonpositive) / d.samples;
    if (x.size() < 2) return d;
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) return d;
    const double gamma = detail::least_squares(x, y).slope - (ell - 1.0);
    const double power = ell - 1.0 + gamma;
    double logC = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < x.size(); ++k) logC = std::max(logC, power * x[k] - y[k]);
    d.gamma_hat = gamma;
    d.C_hat = std::exp(logC);
    return d;
}

inline DissipationDiagnostic check_dissipation_inequality(const NormSeries& series, double ell,
                                                          const std::optional<OperatorSpec>& spec = std::nullopt) {
    auto d = check_dissipation_inequality(series.norm(ell), series.pairing(ell), ell);
    if (spec && std::holds_alternative<op::Laplacian>(*spec) && ell == 2.0)
        d.poincare_ok = d.gamma_hat && *d.gamma_hat >= 1.0 - 0.05;
    return d;
}

}  // namespace decaylab
