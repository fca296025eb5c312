#pragma once

// Independent reference computations for the unit tests. Everything here is
// evaluated by generic adaptive quadrature, never by the closed forms the
// library uses.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "decaylab/domain.hpp"

namespace oracle {

inline double gk(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-14);
}

inline double ts(const std::function<double(double)>& f, double a, double b) {
    static boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate([&](double x) -> double { return f(x); }, a, b, 1e-14);
}

inline double to_infinity(const std::function<double(double)>& f, double a) {
    static boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([&](double x) -> double { return f(x); }, a, std::numeric_limits<double>::infinity(), 1e-14);
}

/// Weights of the cellwise scheme recomputed by quadrature: the hat of the
/// node at distance d*h integrated against r^{-1-sigma}, with the singular
/// cell replaced by the (r/h)^q model.
struct Weights {
    double h, sigma, q;

    double kernel(double r) const { return std::pow(r, -1.0 - sigma); }

    double singular() const {
        return ts([&](double r) { return r > 0.0 ? std::pow(r, q - 1.0 - sigma) / std::pow(h, q) : 0.0; }, 0.0, h);
    }
    double near(int d) const {
        if (d == 1) return singular();
        const double D = d * h;
        return gk([&](double r) { return (r - (D - h)) / h * kernel(r); }, D - h, D);
    }
    double far(int d) const {
        const double D = d * h;
        return gk([&](double r) { return (D + h - r) / h * kernel(r); }, D, D + h);
    }
    double pair(int i, int j) const {
        const int d = std::abs(i - j);
        return near(d) + far(d);
    }
    double exterior(double D) const {
        return to_infinity([&](double r) { return kernel(r); }, D);
    }
    /// Ghost half hats plus both exterior half-lines for node i of n.
    double boundary(int i, int n) const {
        return near(i + 1) + near(n - i) + exterior((i + 1) * h) + exterior((n - i) * h);
    }
};

inline double phi(double z, double p) { return z == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(z), p - 1.0), z); }

/// Direct double sum of the fractional p-Laplacian with quadrature weights.
inline std::vector<double> fractional_p(const std::vector<double>& u, double h, double s, double p) {
    const Weights w{h, s * p, p};
    const int n = static_cast<int>(u.size());
    std::vector<double> pw(n, 0.0), bw(n);
    for (int d = 1; d < n; ++d) pw[d] = w.pair(0, d);
    for (int i = 0; i < n; ++i) bw[i] = w.boundary(i, n);
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (j != i) out[i] += phi(u[i] - u[j], p) * pw[std::abs(i - j)];
        out[i] += phi(u[i], p) * bw[i];
    }
    return out;
}

inline std::vector<double> random_values(int n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = U(rng);
    return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace oracle
