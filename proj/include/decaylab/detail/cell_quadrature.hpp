#pragma once

// Exact cell integrals of |x_i - y|^{-1-sigma} against the piecewise-linear
// hat basis of a uniform 1D grid. Shared by every nonlocal operator.

#include <cmath>
#include <cstdlib>
#include <vector>

#include "decaylab/domain/grid.hpp"
#include "decaylab/error.hpp"

namespace decaylab::detail {

/// \int_A^B r^q dr for 0 <= A <= B (A == 0 requires q > -1).
inline double power_integral(double q, double A, double B) {
    if (B <= A) return 0.0;
    const double e = q + 1.0;
    if (A == 0.0) return std::pow(B, e) / e;
    const double L = std::log(B / A);
    if (e == 0.0) return L;
    return std::pow(A, e) * std::expm1(e * L) / e;
}

/// Half of a hat centred at distance D from the evaluation node, on the side
/// facing it: \int_{D-h}^{D} (r-(D-h))/h * r^{-1-sigma} dr.
inline double near_half_hat(double D, double h, double sigma) {
    const double A = D - h;
    return (power_integral(-sigma, A, D) - A * power_integral(-1.0 - sigma, A, D)) / h;
}

/// The far half: \int_D^{D+h} (D+h-r)/h * r^{-1-sigma} dr.
inline double far_half_hat(double D, double h, double sigma) {
    const double B = D + h;
    return (B * power_integral(-1.0 - sigma, D, B) - power_integral(-sigma, D, B)) / h;
}

/// Weights of the cellwise quadrature for a kernel |x-y|^{-1-sigma}, sigma in (0, q).
///
/// On [x_i - h, x_i + h] the odd (linear) part of the integrand cancels in the
/// principal value and the remainder is modelled as (r/h)^q times the node
/// differences, which contributes h^{-sigma}/(q - sigma) per neighbour. q = 2
/// is the curvature remainder of a smooth u; q = p for the p-Laplacian numerator.
struct KernelWeights {
    double h = 0.0;
    double sigma = 0.0;
    double q = 2.0;
    std::vector<double> by_distance;  // [d], d = 1..N-1, full interior hats
    std::vector<double> ghost_left;   // [i], half hat of the boundary node x = a
    std::vector<double> ghost_right;  // [i], half hat of the boundary node x = b
    std::vector<double> exterior;     // [i], \int_{R \ Omega} |x_i - y|^{-1-sigma} dy

    int points() const { return static_cast<int>(exterior.size()); }
    double pair(int i, int j) const { return by_distance[static_cast<std::size_t>(std::abs(i - j))]; }
    double boundary(int i) const { return ghost_left[i] + ghost_right[i] + exterior[i]; }
};

inline double singular_weight(double h, double sigma, double q) { return std::pow(h, -sigma) / (q - sigma); }

inline double hat_weight(int d, double h, double sigma, double q) {
    const double D = d * h;
    const double near = d == 1 ? singular_weight(h, sigma, q) : near_half_hat(D, h, sigma);
    return near + far_half_hat(D, h, sigma);
}

inline double ghost_weight(int d, double h, double sigma, double q) {
    return d == 1 ? singular_weight(h, sigma, q) : near_half_hat(d * h, h, sigma);
}

inline KernelWeights make_kernel_weights(const Axis& ax, double sigma, double q) {
    require(sigma > 0.0 && sigma < q, "kernel exponent sigma must lie in (0, q)");
    const int n = ax.points;
    const double h = ax.h;
    KernelWeights w;
    w.h = h;
    w.sigma = sigma;
    w.q = q;
    w.by_distance.assign(static_cast<std::size_t>(n), 0.0);
    for (int d = 1; d < n; ++d) w.by_distance[d] = hat_weight(d, h, sigma, q);
    w.ghost_left.resize(n);
    w.ghost_right.resize(n);
    w.exterior.resize(n);
    for (int i = 0; i < n; ++i) {
        const int dl = i + 1, dr = n - i;
        w.ghost_left[i] = ghost_weight(dl, h, sigma, q);
        w.ghost_right[i] = ghost_weight(dr, h, sigma, q);
        w.exterior[i] = (std::pow(dl * h, -sigma) + std::pow(dr * h, -sigma)) / sigma;
    }
    return w;
}

/// Weights of the integrable Riesz-type kernel |x-y|^{2s-1}, s in (0, 1/2),
/// against the interior hats: V[i][j] = \int phi_j(y) |x_i - y|^{2s-1} dy for
/// i in [-1, N] (the two boundary points included) and j in [0, N).
inline std::vector<std::vector<double>> riesz_hat_weights(const Axis& ax, double s) {
    const int n = ax.points;
    const double h = ax.h;
    const double sigma = -2.0 * s;  // r^{2s-1} = r^{-1-sigma}
    const double self = 2.0 * std::pow(h, 2.0 * s) * (1.0 / (2.0 * s) - 1.0 / (2.0 * s + 1.0));
    std::vector<double> by_d(static_cast<std::size_t>(n + 2), 0.0);
    by_d[0] = self;
    for (int d = 1; d < n + 2; ++d) by_d[d] = near_half_hat(d * h, h, sigma) + far_half_hat(d * h, h, sigma);
    std::vector<std::vector<double>> V(static_cast<std::size_t>(n + 2), std::vector<double>(n, 0.0));
    for (int i = -1; i <= n; ++i)
        for (int j = 0; j < n; ++j) V[i + 1][j] = by_d[static_cast<std::size_t>(std::abs(i - j))];
    return V;
}

}  // namespace decaylab::detail
