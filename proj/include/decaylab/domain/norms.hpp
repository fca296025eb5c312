#pragma once

#include <cmath>
#include <string>

#include "decaylab/detail/cell_quadrature.hpp"
#include "decaylab/domain/field.hpp"

namespace decaylab {

/// Midpoint-rule L^ell norm (sum |u_i|^ell h^n)^(1/ell); complex fields use the modulus.
template <class T>
double lp_norm(const BasicField<T>& u, double ell) {
    require(std::isfinite(ell) && ell >= 1.0, "lp_norm: exponent must be finite and >= 1");
    const double scale = max_abs(u);
    for (const auto& x : u.values())
        if (!std::isfinite(std::abs(x))) throw std::invalid_argument("lp_norm: field contains NaN or Inf");
    if (scale == 0.0) return 0.0;
    // Factor out the max modulus so |u|^ell cannot underflow or overflow.
    double sum = 0.0;
    for (const auto& x : u.values()) sum += std::pow(std::abs(x) / scale, ell);
    return scale * std::pow(sum * u.grid().cell_volume(), 1.0 / ell);
}

/// sum over faces of ((u_{i+1} - u_i)/h)^2 h, with zero values at both ends.
inline double h1_seminorm_sq(const Field& u) {
    require(u.grid().kind() == GridKind::interval, "h1_seminorm_sq: interval grids only");
    const auto& ax = u.grid().axis(0);
    const int n = ax.points;
    double sum = 0.0;
    double prev = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double cur = i < n ? u[i] : 0.0;
        const double d = (cur - prev) / ax.h;
        sum += d * d;
        prev = cur;
    }
    return sum * ax.h;
}

/// Discrete Gagliardo energy of the zero extension:
///   h * sum_{i != j} (u_i - u_j)^2 w_ij  +  2h * sum_i u_i^2 (ghost_i + T_i),
/// with the hat weights of the 1 + 2s kernel (the last term is the
/// interaction of Omega with the exterior, where u = 0).
inline double gagliardo_seminorm_sq(const Field& u, double s) {
    require(s > 0.0 && s < 1.0, "s must lie in (0,1)");
    require(u.grid().kind() == GridKind::interval, "gagliardo_seminorm_sq: interval grids only");
    const auto w = detail::make_kernel_weights(u.grid().axis(0), 2.0 * s, 2.0);
    const int n = u.size();
    double pairs = 0.0, tails = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = u[i] - u[j];
            pairs += d * d * w.pair(i, j);
        }
        tails += u[i] * u[i] * w.boundary(i);
    }
    return w.h * (2.0 * pairs + 2.0 * tails);
}

}  // namespace decaylab
