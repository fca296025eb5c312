#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "decaylab/domain/field.hpp"
#include "decaylab/error.hpp"

namespace decaylab {

/// Kirchhoff coefficient M(t) = a + b t. a >= 0, b >= 0 keeps M nondecreasing.
struct AffineM {
    double a = 1.0;
    double b = 0.0;
    double operator()(double t) const { return a + b * t; }
    bool operator==(const AffineM&) const = default;
};

/// Magnetic potential tabulated on the interior nodes of an interval grid.
struct MagneticPotential {
    std::vector<double> values;

    static MagneticPotential constant(double value, int points) {
        return {std::vector<double>(static_cast<std::size_t>(points), value)};
    }

    template <class F>
    static MagneticPotential sample(const Axis& ax, F&& f) {
        MagneticPotential A;
        for (int i = 0; i < ax.points; ++i) A.values.push_back(f(ax.node(i)));
        return A;
    }

    /// Linear interpolation between nodes; constant beyond the outermost nodes.
    double at(const Axis& ax, double x) const {
        const int n = static_cast<int>(values.size());
        const double pos = (x - ax.a) / ax.h - 1.0;
        if (pos <= 0.0) return values.front();
        if (pos >= n - 1) return values.back();
        const int i = static_cast<int>(pos);
        const double w = pos - i;
        return (1.0 - w) * values[i] + w * values[i + 1];
    }

    bool operator==(const MagneticPotential&) const = default;
};

namespace op {

struct Laplacian {
    bool operator==(const Laplacian&) const = default;
};
struct BiLaplacian {
    bool operator==(const BiLaplacian&) const = default;
};
struct PLaplacianPorous {
    double p = 2.0;
    double m = 1.0;
    bool operator==(const PLaplacianPorous&) const = default;
};
struct MeanCurvature {
    bool operator==(const MeanCurvature&) const = default;
};
struct FractionalLaplacian {
    double s = 0.5;
    bool operator==(const FractionalLaplacian&) const = default;
};
struct FractionalPLaplacian {
    double s = 0.5;
    double p = 2.0;
    bool operator==(const FractionalPLaplacian&) const = default;
};
struct SuperpositionTerm {
    double beta = 1.0;
    double s = 0.5;
    double p = 2.0;
    bool operator==(const SuperpositionTerm&) const = default;
};
struct Superposition {
    std::vector<SuperpositionTerm> terms;
    bool operator==(const Superposition&) const = default;
};
struct AnisotropicFractional {
    std::vector<double> beta;
    std::vector<double> sigma;
    bool operator==(const AnisotropicFractional&) const = default;
};
struct PorousMediumI {
    double s = 0.5;
    double m = 1.0;
    bool operator==(const PorousMediumI&) const = default;
};
struct PorousMediumII {
    double s = 0.25;
    bool operator==(const PorousMediumII&) const = default;
};
struct FractionalMeanCurvature {
    double s = 0.5;
    bool operator==(const FractionalMeanCurvature&) const = default;
};
struct Kirchhoff {
    AffineM M;
    bool operator==(const Kirchhoff&) const = default;
};
struct FractionalKirchhoff {
    double s = 0.5;
    AffineM M;
    bool operator==(const FractionalKirchhoff&) const = default;
};
struct Magnetic {
    MagneticPotential A;
    bool operator==(const Magnetic&) const = default;
};
struct FractionalMagnetic {
    double s = 0.5;
    MagneticPotential A;
    bool operator==(const FractionalMagnetic&) const = default;
};

}  // namespace op

/// The spatial operator N entering u_t-type equations with a + sign, i.e.
/// every divergence form is returned negated so that N is dissipative.
using OperatorSpec =
    std::variant<op::Laplacian, op::BiLaplacian, op::PLaplacianPorous, op::MeanCurvature, op::FractionalLaplacian,
                 op::FractionalPLaplacian, op::Superposition, op::AnisotropicFractional, op::PorousMediumI,
                 op::PorousMediumII, op::FractionalMeanCurvature, op::Kirchhoff, op::FractionalKirchhoff,
                 op::Magnetic, op::FractionalMagnetic>;

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

inline std::string operator_name(const OperatorSpec& spec) {
    return std::visit(overloaded{
                          [](const op::Laplacian&) { return "laplacian"; },
                          [](const op::BiLaplacian&) { return "bilaplacian"; },
                          [](const op::PLaplacianPorous&) { return "p_laplacian_porous"; },
                          [](const op::MeanCurvature&) { return "mean_curvature"; },
                          [](const op::FractionalLaplacian&) { return "fractional_laplacian"; },
                          [](const op::FractionalPLaplacian&) { return "fractional_p_laplacian"; },
                          [](const op::Superposition&) { return "superposition"; },
                          [](const op::AnisotropicFractional&) { return "anisotropic_fractional"; },
                          [](const op::PorousMediumI&) { return "porous_medium_1"; },
                          [](const op::PorousMediumII&) { return "porous_medium_2"; },
                          [](const op::FractionalMeanCurvature&) { return "fractional_mean_curvature"; },
                          [](const op::Kirchhoff&) { return "kirchhoff"; },
                          [](const op::FractionalKirchhoff&) { return "fractional_kirchhoff"; },
                          [](const op::Magnetic&) { return "magnetic"; },
                          [](const op::FractionalMagnetic&) { return "fractional_magnetic"; },
                      },
                      spec);
}

inline bool is_magnetic(const OperatorSpec& spec) {
    return std::holds_alternative<op::Magnetic>(spec) || std::holds_alternative<op::FractionalMagnetic>(spec);
}

inline bool needs_box(const OperatorSpec& spec) { return std::holds_alternative<op::AnisotropicFractional>(spec); }

inline ScalarKind scalar_kind(const OperatorSpec& spec) {
    return is_magnetic(spec) ? ScalarKind::complex : ScalarKind::real;
}

/// True when N[u] is linear in u (for the given parameters).
inline bool is_linear(const OperatorSpec& spec) {
    return std::visit(overloaded{
                          [](const op::Laplacian&) { return true; },
                          [](const op::BiLaplacian&) { return true; },
                          [](const op::PLaplacianPorous& o) { return o.p == 2.0 && o.m == 1.0; },
                          [](const op::MeanCurvature&) { return false; },
                          [](const op::FractionalLaplacian&) { return true; },
                          [](const op::FractionalPLaplacian& o) { return o.p == 2.0; },
                          [](const op::Superposition& o) {
                              for (const auto& t : o.terms)
                                  if (t.p != 2.0) return false;
                              return true;
                          },
                          [](const op::AnisotropicFractional&) { return true; },
                          [](const op::PorousMediumI& o) { return o.m == 1.0; },
                          [](const op::PorousMediumII&) { return false; },
                          [](const op::FractionalMeanCurvature&) { return false; },
                          [](const op::Kirchhoff& o) { return o.M.b == 0.0; },
                          [](const op::FractionalKirchhoff& o) { return o.M.b == 0.0; },
                          [](const op::Magnetic&) { return true; },
                          [](const op::FractionalMagnetic&) { return true; },
                      },
                      spec);
}

namespace detail {

inline void check_s(double s, const char* what = "s") {
    require(std::isfinite(s) && s > 0.0 && s < 1.0, std::string(what) + " must lie in (0,1)");
}
inline void check_p(double p, const char* what = "p") {
    require(std::isfinite(p) && p > 1.0, std::string(what) + " must lie in (1,inf)");
}
inline void check_m(double m) { require(std::isfinite(m) && m > 0.0, "m must lie in (0,inf)"); }
inline void check_M(const AffineM& M) {
    require(std::isfinite(M.a) && std::isfinite(M.b) && M.a >= 0.0 && M.b >= 0.0,
            "Kirchhoff M(t) = a + b t needs a >= 0 and b >= 0 (M nondecreasing and nonnegative)");
    require(M.a + M.b > 0.0, "Kirchhoff M(t) = a + b t needs a + b > 0");
}

}  // namespace detail

/// Checks the parameter invariants of the spec; throws std::invalid_argument.
inline void validate(const OperatorSpec& spec) {
    std::visit(overloaded{
                   [](const op::Laplacian&) {},
                   [](const op::BiLaplacian&) {},
                   [](const op::PLaplacianPorous& o) {
                       detail::check_p(o.p);
                       detail::check_m(o.m);
                   },
                   [](const op::MeanCurvature&) {},
                   [](const op::FractionalLaplacian& o) { detail::check_s(o.s); },
                   [](const op::FractionalPLaplacian& o) {
                       detail::check_s(o.s);
                       detail::check_p(o.p);
                   },
                   [](const op::Superposition& o) {
                       require(!o.terms.empty(), "superposition needs at least one term");
                       for (const auto& t : o.terms) {
                           require(std::isfinite(t.beta) && t.beta > 0.0, "superposition weights beta_j must be > 0");
                           detail::check_s(t.s, "s_j");
                           detail::check_p(t.p, "p_j");
                       }
                   },
                   [](const op::AnisotropicFractional& o) {
                       require(o.beta.size() == 2 && o.sigma.size() == 2,
                               "anisotropic_fractional needs beta and sigma of length 2 (box grids)");
                       for (double b : o.beta) require(std::isfinite(b) && b > 0.0, "beta_j must be > 0");
                       for (double s : o.sigma) detail::check_s(s, "sigma_j");
                   },
                   [](const op::PorousMediumI& o) {
                       detail::check_s(o.s);
                       detail::check_m(o.m);
                   },
                   [](const op::PorousMediumII& o) {
                       detail::check_s(o.s);
                       require(o.s < 0.5,
                               "porous_medium_2 on an interval needs s < 1/2: the potential kernel |x-y|^(2s-1) "
                               "does not decay for s >= 1/2 in one dimension");
                   },
                   [](const op::FractionalMeanCurvature& o) { detail::check_s(o.s); },
                   [](const op::Kirchhoff& o) { detail::check_M(o.M); },
                   [](const op::FractionalKirchhoff& o) {
                       detail::check_s(o.s);
                       detail::check_M(o.M);
                   },
                   [](const op::Magnetic& o) { require(!o.A.values.empty(), "magnetic potential table is empty"); },
                   [](const op::FractionalMagnetic& o) {
                       detail::check_s(o.s);
                       require(!o.A.values.empty(), "magnetic potential table is empty");
                   },
               },
               spec);
}

}  // namespace decaylab
