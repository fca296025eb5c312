#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <json.hpp>

#include "decaylab/decay/fit.hpp"

namespace decaylab {

/// Operator name plus its parameters, in the key names the config files use.
inline nlohmann::ordered_json spec_to_json(const OperatorSpec& spec) {
    using J = nlohmann::ordered_json;
    J j;
    j["operator"] = operator_name(spec);
    auto M = [](const AffineM& m) { return J{{"a", m.a}, {"b", m.b}}; };
    auto A = [](const MagneticPotential& a) {
        const bool constant =
            std::all_of(a.values.begin(), a.values.end(), [&](double v) { return v == a.values.front(); });
        return constant ? J(a.values.front()) : J(a.values);
    };
    std::visit(overloaded{
                   [](const op::Laplacian&) {},
                   [](const op::BiLaplacian&) {},
                   [&](const op::PLaplacianPorous& o) {
                       j["p"] = o.p;
                       j["m"] = o.m;
                   },
                   [](const op::MeanCurvature&) {},
                   [&](const op::FractionalLaplacian& o) { j["s"] = o.s; },
                   [&](const op::FractionalPLaplacian& o) {
                       j["s"] = o.s;
                       j["p"] = o.p;
                   },
                   [&](const op::Superposition& o) {
                       J terms = J::array();
                       for (const auto& t : o.terms) terms.push_back(J{{"beta", t.beta}, {"s", t.s}, {"p", t.p}});
                       j["terms"] = terms;
                   },
                   [&](const op::AnisotropicFractional& o) {
                       j["beta"] = o.beta;
                       j["sigma"] = o.sigma;
                   },
                   [&](const op::PorousMediumI& o) {
                       j["s"] = o.s;
                       j["m"] = o.m;
                   },
                   [&](const op::PorousMediumII& o) { j["s"] = o.s; },
                   [&](const op::FractionalMeanCurvature& o) { j["s"] = o.s; },
                   [&](const op::Kirchhoff& o) { j["M"] = M(o.M); },
                   [&](const op::FractionalKirchhoff& o) {
                       j["s"] = o.s;
                       j["M"] = M(o.M);
                   },
                   [&](const op::Magnetic& o) { j["A"] = A(o.A); },
                   [&](const op::FractionalMagnetic& o) {
                       j["s"] = o.s;
                       j["A"] = A(o.A);
                   },
               },
               spec);
    return j;
}

namespace detail {

inline nlohmann::ordered_json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

template <class T>
nlohmann::ordered_json optional_json(const std::optional<T>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const DecayPrediction& p) {
    nlohmann::ordered_json j;
    j["form"] = to_string(p.form);
    j["exponent"] = detail::number_or_null(p.exponent);
    j["ell_range"] = {p.ell_range.lo, detail::number_or_null(p.ell_range.hi)};
    j["row"] = p.row;
    j["source"] = p.source;
    j["theta"] = p.theta;
    j["ambiguous"] = p.ambiguous;
    if (!p.supported()) j["reason"] = p.reason;
    return j;
}

inline nlohmann::ordered_json to_json(const FitResult& f) {
    nlohmann::ordered_json j;
    j["form"] = to_string(f.form);
    j["rate"] = f.rate;
    j["stderr"] = f.stderr_rate;
    j["window"] = {f.window.t0, f.window.t1};
    j["samples"] = f.samples;
    j["r2"] = f.r2;
    j["r2_polynomial"] = f.r2_polynomial;
    j["r2_exponential"] = f.r2_exponential;
    j["rate_polynomial"] = f.rate_polynomial;
    j["rate_exponential"] = f.rate_exponential;
    return j;
}

inline nlohmann::ordered_json to_json(const DissipationDiagnostic& d) {
    nlohmann::ordered_json j;
    j["samples"] = d.samples;
    j["positive"] = d.positive;
    j["fraction_nonpositive"] = d.fraction_nonpositive;
    j["gamma_hat"] = detail::optional_json(d.gamma_hat);
    j["C_hat"] = detail::optional_json(d.C_hat);
    if (d.poincare_ok) j["poincare_gamma_ok"] = *d.poincare_ok;
    return j;
}

struct Report {
    OperatorSpec spec;
    double lambda1 = 0.0, lambda2 = 1.0, alpha = 0.0, ell = 2.0;
    DecayPrediction predicted;
    std::optional<FitResult> fitted;
    Judgement judgement;
    DissipationDiagnostic dissipation;
    nlohmann::ordered_json run_metadata = nlohmann::ordered_json::object();
};

/// Judges fit against pred and bundles everything a report.json needs.
inline Report verdict(const DecayPrediction& pred, const FitResult& fit, double tol_rel = default_rate_tolerance) {
    Report r;
    r.predicted = pred;
    r.fitted = fit;
    r.judgement = judge(pred, fit, tol_rel);
    return r;
}

inline nlohmann::ordered_json to_json(const Report& r) {
    nlohmann::ordered_json j;
    j["version"] = "1";
    j["spec"] = spec_to_json(r.spec);
    j["regime"] = {{"lambda1", r.lambda1}, {"lambda2", r.lambda2}};
    j["alpha"] = r.alpha;
    j["ell"] = r.ell;
    j["predicted"] = to_json(r.predicted);
    j["fitted"] = r.fitted ? to_json(*r.fitted) : nlohmann::ordered_json(nullptr);
    j["verdict"] = to_string(r.judgement.verdict);
    j["verdict_note"] = r.judgement.note;
    j["gamma_hat"] = detail::optional_json(r.dissipation.gamma_hat);
    j["C_hat"] = detail::optional_json(r.dissipation.C_hat);
    j["dissipation"] = to_json(r.dissipation);
    j["run_metadata"] = r.run_metadata;
    return j;
}

}  // namespace decaylab
