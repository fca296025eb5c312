#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "decaylab/operators/spec.hpp"

namespace decaylab {

enum class RateForm { polynomial, exponential, unsupported };

inline const char* to_string(RateForm f) {
    switch (f) {
        case RateForm::polynomial: return "polynomial";
        case RateForm::exponential: return "exponential";
        case RateForm::unsupported: return "unsupported";
    }
    return "?";
}

/// Time-derivative regime of lambda1 d^alpha u + lambda2 u_t + N[u] = 0.
enum class Regime { memory, classical };

inline const char* to_string(Regime r) { return r == Regime::memory ? "memory" : "classical"; }

inline const char* regime_condition(Regime r) {
    return r == Regime::memory ? "lambda1 in (0,1], lambda2 in [0,1)" : "lambda1 = 0, lambda2 = 1";
}

/// Admissible norm exponents [lo, hi).
struct EllRange {
    double lo = 1.0;
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double ell) const { return ell >= lo && ell < hi; }
    bool empty() const { return !(hi > lo); }
    std::string str() const {
        if (std::isinf(hi)) return "[1, inf)";
        char buf[64];
        std::snprintf(buf, sizeof buf, "[%g, %.6g)", lo, hi);
        return buf;
    }
};

/// One row of the published decay tables. `ell_bound` and `theta` are the
/// quoted forms; the numbers are produced by predicted_rate.
struct CatalogRow {
    std::string id;  // "T<table>.<row>", or "S<k>" for supplementary rows
    std::string family;
    std::string guard;
    Regime regime;
    std::string ell_bound;
    std::string theta;
    RateForm form;
    std::string reference;
    bool ambiguous = false;
    bool supplementary = false;
    /// Restriction of this implementation, if any; empty when every guard
    /// value is runnable.
    std::string annotation;
};

inline const std::vector<CatalogRow>& decay_catalog() {
    using R = Regime;
    using F = RateForm;
    static const std::vector<CatalogRow> rows = {
        {"T1.1", "nonlinear classical diffusion Delta_p u^m", "", R::memory, "[1, inf)", "1/t^(alpha/(m(p-1)))",
         F::polynomial, "table 1, Thm 1.2"},
        {"T1.2", "nonlinear classical diffusion Delta_p u^m", "(m,p) != (1,2)", R::classical, "[1, inf)",
         "1/t^(1/(m(p-1)-1))", F::polynomial, "table 1, Thm 1.2", false, false,
         "only m(p-1) > 1 gives a positive exponent; m(p-1) <= 1 is reported unsupported"},
        {"T1.3", "Bi-Laplacian Delta_2 u", "", R::classical, "[1, inf)", "e^(-t/C)", F::exponential,
         "table 1, Thm 1.2", true, false,
         "symbol is ambiguous between Delta^2 and Delta_p with p = 2; verdicts are never scored"},
        {"T1.4", "graphical mean curvature", "", R::memory, "[1, inf)", "1/t^alpha", F::polynomial,
         "table 1, Thm 1.5"},
        {"T1.5", "graphical mean curvature", "", R::classical, "[1, inf)", "e^(-t/C)", F::exponential,
         "table 1, Thm 1.5"},
        {"T1.6", "fractional p-Laplacian", "", R::memory, "[1, inf)", "1/t^(alpha/(p-1))", F::polynomial,
         "table 1, Thm 1.6"},
        {"T1.7", "fractional p-Laplacian", "p > 2", R::classical, "[1, inf)", "1/t^(1/(p-2))", F::polynomial,
         "table 1, Thm 1.6"},
        {"T1.8", "fractional p-Laplacian", "p <= 2", R::classical, "[1, inf)", "e^(-t/C)", F::exponential,
         "table 1, Thm 1.6"},
        {"T1.9", "superposition of fractional p-Laplacians", "", R::memory, "[1, inf)", "1/t^(alpha/(p_max-1))",
         F::polynomial, "table 1, Thm 1.7"},
        {"T1.10", "superposition of fractional p-Laplacians", "p_max > 2", R::classical, "[1, inf)",
         "1/t^(1/(p_max-2))", F::polynomial, "table 1, Thm 1.7"},
        {"T1.11", "superposition of fractional p-Laplacians", "p_max <= 2", R::classical, "[1, inf)", "e^(-t/C)",
         F::exponential, "table 1, Thm 1.7"},
        {"T1.12", "anisotropic fractional Laplacian", "", R::memory, "[1, inf)", "1/t^alpha", F::polynomial,
         "table 1, Thm 1.8"},
        {"T1.13", "anisotropic fractional Laplacian", "", R::classical, "[1, inf)", "e^(-t/C)", F::exponential,
         "table 1, Thm 1.8"},
        {"T1.14", "fractional porous media I", "", R::memory, "[1, inf)", "1/t^(alpha/m)", F::polynomial,
         "table 1, Thm 1.9"},
        {"T1.15", "fractional porous media I", "m > 1", R::classical, "[1, inf)", "1/t^(1/(m-1))", F::polynomial,
         "table 1, Thm 1.9"},
        {"T1.16", "fractional porous media I", "m <= 1", R::classical, "[1, inf)", "e^(-t/C)", F::exponential,
         "table 1, Thm 1.9"},
        {"T1.17", "fractional mean curvature", "", R::memory, "[1, inf)", "1/t^alpha", F::polynomial,
         "table 1, Thm 1.10"},
        {"T1.18", "fractional mean curvature", "", R::classical, "[1, inf)", "e^(-t/C)", F::exponential,
         "table 1, Thm 1.10"},

        {"T2.1", "fractional porous media II", "", R::memory, "[1, inf)", "1/t^(alpha/2)", F::polynomial,
         "table 2, Thm 1.3", false, false, "implemented on intervals for s in (0,1/2) only"},
        {"T2.2", "fractional porous media II", "", R::classical, "[1, inf)", "1/t", F::polynomial,
         "table 2, Thm 1.3", false, false, "implemented on intervals for s in (0,1/2) only"},
        {"T2.3", "classical Kirchhoff", "M(0) > 0", R::memory, "[1, inf)", "1/t^alpha", F::polynomial,
         "table 2, Thm 1.4"},
        {"T2.4", "classical Kirchhoff", "M(t) = bt, b > 0, n <= 4", R::memory, "[1, inf)", "1/t^(alpha/3)",
         F::polynomial, "table 2, Thm 1.4"},
        {"T2.5", "classical Kirchhoff", "M(t) = bt, b > 0, n >= 5", R::memory, "[1, 2n/(n-4))", "1/t^(alpha/3)",
         F::polynomial, "table 2, Thm 1.4"},
        {"T2.6", "classical Kirchhoff", "M(0) > 0", R::classical, "[1, inf)", "e^(-t/C)", F::exponential,
         "table 2, Thm 1.4"},
        {"T2.7", "classical Kirchhoff", "M(t) = bt, b > 0", R::classical, "[1, inf)", "1/sqrt(t)", F::polynomial,
         "table 2, Thm 1.4"},
        {"T2.8", "fractional Kirchhoff", "M(0) > 0", R::memory, "[1, inf)", "1/t^alpha", F::polynomial,
         "table 2, Thm 1.5"},
        {"T2.9", "fractional Kirchhoff", "M(t) = bt, b > 0, n <= 4s", R::memory, "[1, inf)", "1/t^(alpha/3)",
         F::polynomial, "table 2, Thm 1.5"},
        {"T2.10", "fractional Kirchhoff", "M(t) = bt, b > 0, n > 4s", R::memory, "[1, 2n/(n-4s))",
         "1/t^(alpha/3)", F::polynomial, "table 2, Thm 1.5"},
        {"T2.11", "fractional Kirchhoff", "M(0) > 0", R::classical, "[1, inf)", "e^(-t/C)", F::exponential,
         "table 2, Thm 1.5"},
        {"T2.12", "fractional Kirchhoff", "M(t) = bt, b > 0", R::classical, "[1, inf)", "1/sqrt(t)",
         F::polynomial, "table 2, Thm 1.5"},
        {"T2.13", "classical magnetic", "", R::memory, "[1, inf)", "1/t^alpha", F::polynomial, "table 2, Thm 1.6"},
        {"T2.14", "classical magnetic", "", R::classical, "[1, inf)", "e^(-t/C)", F::exponential,
         "table 2, Thm 1.6"},
        {"T2.15", "fractional magnetic", "", R::memory, "[1, inf)", "1/t^alpha", F::polynomial, "table 2, Thm 1.7"},
        {"T2.16", "fractional magnetic", "", R::classical, "[1, inf)", "e^(-t/C)", F::exponential,
         "table 2, Thm 1.7"},

        {"S1", "linear heat equation (Delta_p u^m at (m,p) = (1,2))", "(m,p) = (1,2)", R::classical, "[1, inf)",
         "e^(-t/C)", F::exponential, "exact Dirichlet eigenmode decay e^(-lambda_1 t)", false, true,
         "not a table row: the (m,p) != (1,2) guard of T1.2 leaves the heat equation to this row"},
    };
    return rows;
}

inline const CatalogRow& catalog_row(const std::string& id) {
    for (const auto& r : decay_catalog())
        if (r.id == id) return r;
    throw std::invalid_argument("no catalog row '" + id + "'");
}

struct DecayPrediction {
    RateForm form = RateForm::unsupported;
    double exponent = std::numeric_limits<double>::quiet_NaN();  // beta of 1/t^beta
    EllRange ell_range;
    std::string row;     // catalog id, empty when no row applies
    std::string source;  // citation of the row
    std::string theta;
    bool ambiguous = false;
    std::string reason;  // why the prediction is unsupported

    bool supported() const { return form != RateForm::unsupported; }
};

namespace detail {

inline DecayPrediction unsupported(std::string reason, const std::string& row = {}) {
    DecayPrediction d;
    d.reason = std::move(reason);
    if (!row.empty()) {
        const auto& r = catalog_row(row);
        d.row = r.id;
        d.source = r.reference;
        d.theta = r.theta;
        d.ambiguous = r.ambiguous;
    }
    return d;
}

inline DecayPrediction from_row(const std::string& id, double exponent = std::numeric_limits<double>::quiet_NaN(),
                                EllRange range = {}) {
    const auto& r = catalog_row(id);
    DecayPrediction d;
    d.form = r.form;
    d.exponent = r.form == RateForm::polynomial ? exponent : std::numeric_limits<double>::quiet_NaN();
    d.ell_range = range;
    d.row = r.id;
    d.source = r.reference;
    d.theta = r.theta;
    d.ambiguous = r.ambiguous;
    if (r.form == RateForm::polynomial && !(exponent > 0.0 && std::isfinite(exponent)))
        return unsupported("row " + id + " gives the non-positive exponent " + std::to_string(exponent), id);
    return d;
}

inline DecayPrediction kirchhoff_rows(const AffineM& M, std::optional<double> s, Regime regime, double alpha, int n) {
    const bool frac = s.has_value();
    if (M.a > 0.0) {
        if (regime == Regime::memory) return from_row(frac ? "T2.8" : "T2.3", alpha);
        return from_row(frac ? "T2.11" : "T2.6");
    }
    if (regime == Regime::classical) return from_row(frac ? "T2.12" : "T2.7", 0.5);
    const double crit = frac ? 4.0 * *s : 4.0;
    if (n <= crit) return from_row(frac ? "T2.9" : "T2.4", alpha / 3.0);
    return from_row(frac ? "T2.10" : "T2.5", alpha / 3.0, EllRange{1.0, 2.0 * n / (n - crit)});
}

}  // namespace detail

/// The decay row of the published tables matching (spec, lambda1, lambda2)
/// for the L^ell norm in dimension n. Never throws for valid regimes: any
/// combination outside every row comes back `unsupported` with the reason.
inline DecayPrediction predicted_rate(const OperatorSpec& spec, double lambda1, double lambda2, double alpha,
                                      double ell, int n = 1) {
    using detail::from_row;
    using detail::unsupported;
    try {
        validate(spec);
    } catch (const std::invalid_argument& e) {
        return unsupported(std::string("operator parameters rejected: ") + e.what());
    }
    if (!(std::isfinite(ell) && ell >= 1.0)) return unsupported("norm exponent must be finite and >= 1");
    if (n < 1) return unsupported("dimension must be >= 1");

    if (std::abs(lambda1 + lambda2 - 1.0) > 1e-12) return unsupported("lambda1 + lambda2 must equal 1");
    Regime regime;
    if (lambda1 > 0.0 && lambda1 <= 1.0 && lambda2 >= 0.0 && lambda2 < 1.0)
        regime = Regime::memory;
    else if (lambda1 == 0.0 && lambda2 == 1.0)
        regime = Regime::classical;
    else
        return unsupported("(lambda1, lambda2) is neither lambda1 in (0,1], lambda2 in [0,1) nor lambda1 = 0, "
                           "lambda2 = 1");
    if (regime == Regime::memory && !(alpha > 0.0 && alpha < 1.0))
        return unsupported("the Caputo order alpha must lie in (0,1) when lambda1 > 0");
    const bool mem = regime == Regime::memory;

    auto nonlinear_classical = [&](double p, double m) {
        if (mem) return from_row("T1.1", alpha / (m * (p - 1.0)));
        if (m == 1.0 && p == 2.0) return from_row("S1");
        const double e = m * (p - 1.0) - 1.0;
        if (e <= 0.0)
            return unsupported("m(p-1) <= 1 makes 1/(m(p-1)-1) non-positive; no table row covers it", "T1.2");
        return from_row("T1.2", 1.0 / e);
    };
    auto fractional_p = [&](double p) {
        if (mem) return from_row("T1.6", alpha / (p - 1.0));
        return p > 2.0 ? from_row("T1.7", 1.0 / (p - 2.0)) : from_row("T1.8");
    };

    DecayPrediction d = std::visit(
        overloaded{
            [&](const op::Laplacian&) { return nonlinear_classical(2.0, 1.0); },
            [&](const op::BiLaplacian&) {
                if (mem) return unsupported("the Bi-Laplacian row exists only for lambda1 = 0, lambda2 = 1", "T1.3");
                return from_row("T1.3");
            },
            [&](const op::PLaplacianPorous& o) { return nonlinear_classical(o.p, o.m); },
            [&](const op::MeanCurvature&) { return mem ? from_row("T1.4", alpha) : from_row("T1.5"); },
            [&](const op::FractionalLaplacian&) { return fractional_p(2.0); },
            [&](const op::FractionalPLaplacian& o) { return fractional_p(o.p); },
            [&](const op::Superposition& o) {
                double pmax = 0.0;
                for (const auto& t : o.terms) pmax = std::max(pmax, t.p);
                if (mem) return from_row("T1.9", alpha / (pmax - 1.0));
                return pmax > 2.0 ? from_row("T1.10", 1.0 / (pmax - 2.0)) : from_row("T1.11");
            },
            [&](const op::AnisotropicFractional&) { return mem ? from_row("T1.12", alpha) : from_row("T1.13"); },
            [&](const op::PorousMediumI& o) {
                if (mem) return from_row("T1.14", alpha / o.m);
                return o.m > 1.0 ? from_row("T1.15", 1.0 / (o.m - 1.0)) : from_row("T1.16");
            },
            [&](const op::PorousMediumII&) { return mem ? from_row("T2.1", alpha / 2.0) : from_row("T2.2", 1.0); },
            [&](const op::FractionalMeanCurvature&) { return mem ? from_row("T1.17", alpha) : from_row("T1.18"); },
            [&](const op::Kirchhoff& o) { return detail::kirchhoff_rows(o.M, std::nullopt, regime, alpha, n); },
            [&](const op::FractionalKirchhoff& o) { return detail::kirchhoff_rows(o.M, o.s, regime, alpha, n); },
            [&](const op::Magnetic&) { return mem ? from_row("T2.13", alpha) : from_row("T2.14"); },
            [&](const op::FractionalMagnetic&) { return mem ? from_row("T2.15", alpha) : from_row("T2.16"); },
        },
        spec);

    if (d.supported() && !d.ell_range.contains(ell)) {
        auto out = unsupported("ell = " + std::to_string(ell) + " lies outside the row's range " + d.ell_range.str(),
                               d.row);
        out.ell_range = d.ell_range;
        return out;
    }
    return d;
}

}  // namespace decaylab
