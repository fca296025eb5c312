#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "decaylab/operators/discrete.hpp"

namespace decaylab {

/// N[u] on the field's grid. Builds the discretization on every call; keep a
/// DiscreteOperator around when applying repeatedly.
template <class T>
BasicField<T> apply_operator(const OperatorSpec& spec, const BasicField<T>& u) {
    return DiscreteOperator(spec, u.grid()).apply(u);
}

inline Field apply_laplacian(const Field& u) { return apply_operator(op::Laplacian{}, u); }
inline Field apply_bilaplacian(const Field& u) { return apply_operator(op::BiLaplacian{}, u); }
inline Field apply_p_laplacian_porous(const Field& u, double p, double m) {
    return apply_operator(op::PLaplacianPorous{p, m}, u);
}
inline Field apply_mean_curvature(const Field& u) { return apply_operator(op::MeanCurvature{}, u); }
inline Field apply_fractional_laplacian(const Field& u, double s) { return apply_operator(op::FractionalLaplacian{s}, u); }
inline Field apply_fractional_p_laplacian(const Field& u, double s, double p) {
    return apply_operator(op::FractionalPLaplacian{s, p}, u);
}
inline Field apply_anisotropic_fractional(const Field& u, std::vector<double> beta, std::vector<double> sigma) {
    return apply_operator(op::AnisotropicFractional{std::move(beta), std::move(sigma)}, u);
}
inline Field apply_porous_medium_I(const Field& u, double s, double m) { return apply_operator(op::PorousMediumI{s, m}, u); }
inline Field apply_porous_medium_II(const Field& u, double s) { return apply_operator(op::PorousMediumII{s}, u); }
inline Field apply_fractional_mean_curvature(const Field& u, double s) {
    return apply_operator(op::FractionalMeanCurvature{s}, u);
}

/// Classical Kirchhoff when s is empty, fractional Kirchhoff otherwise.
inline Field apply_kirchhoff(const Field& u, AffineM M, std::optional<double> s = std::nullopt) {
    if (s) return apply_operator(op::FractionalKirchhoff{*s, M}, u);
    return apply_operator(op::Kirchhoff{M}, u);
}

inline ComplexField apply_magnetic(const ComplexField& u, MagneticPotential A, std::optional<double> s = std::nullopt) {
    if (s) return apply_operator(op::FractionalMagnetic{*s, std::move(A)}, u);
    return apply_operator(op::Magnetic{std::move(A)}, u);
}

/// h^n sum_i w(u_i) Re(conj(u_i) Nu_i) with w = |u|^{ell-2}; for ell < 2 the
/// weight is regularized as (|u|^2 + eps^2)^{(ell-2)/2}, eps = 1e-12 max|u|.
template <class T>
double pairing(std::span<const T> u, std::span<const T> Nu, double ell, double cell_volume) {
    require(std::isfinite(ell) && ell >= 1.0, "pairing exponent must be finite and >= 1");
    require(u.size() == Nu.size(), "pairing: length mismatch");
    double umax = 0.0;
    for (const auto& x : u) umax = std::max(umax, static_cast<double>(std::abs(x)));
    const double eps = 1e-12 * umax;
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double re;
        if constexpr (is_complex_v<T>)
            re = std::real(std::conj(u[i]) * Nu[i]);
        else
            re = u[i] * Nu[i];
        const double a = std::abs(u[i]);
        double w = 1.0;
        if (ell > 2.0)
            w = std::pow(a, ell - 2.0);
        else if (ell < 2.0)
            w = std::pow(a * a + eps * eps, (ell - 2.0) / 2.0);
        sum += w * re;
    }
    return sum * cell_volume;
}

template <class T>
double dissipation_pairing(const BasicField<T>& u, double ell, const OperatorSpec& spec) {
    const auto Nu = apply_operator(spec, u);
    const double D = pairing<T>(u.values(), Nu.values(), ell, u.grid().cell_volume());
    if (!std::isfinite(D)) throw ComputationError("dissipation pairing is not finite");
    return D;
}

}  // namespace decaylab
