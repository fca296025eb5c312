#pragma once

#include <array>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/sin_pi.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "decaylab/error.hpp"

namespace decaylab {

// Radial heat kernels G_s(r, t) of d_t G + (-Delta)^s G = 0 in R^n, i.e. the
// inverse Fourier transform of exp(-t |xi|^{2s}), and their ball masses.
//
// Away from the closed forms (s = 1 Gaussian, s = 1/2 Poisson kernel) values
// come from, in order of preference:
//  - the power series in r around 0 (convergent for s > 1/2, asymptotic below),
//  - the series in r^{-2s} at infinity (convergent for s < 1/2, asymptotic above),
//  - a single quadrature: for s < 1/2 the Fourier integral is rotated onto the
//    imaginary axis, where it no longer oscillates; for s > 1/2 the integrand
//    decays fast enough to integrate the oscillations panel by panel.
// A series is only accepted once its terms fall below 1e-16 of the sum with
// no term ever exceeding 1e3 times it.

namespace detail {

inline constexpr double kernel_tol = 1e-10;

inline void check_kernel_args(double s, int n, double t) {
    require(std::isfinite(s) && s > 0.0 && s <= 1.0, "s must lie in (0,1]");
    require(n >= 1 && n <= 3, "dimension n must be 1, 2 or 3");
    require(std::isfinite(t) && t > 0.0, "time t must be > 0");
}

inline double sphere_area(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

inline double ball_volume(int n, double rho) { return sphere_area(n) * std::pow(rho, n) / n; }

inline std::optional<double> scaled(std::optional<double> v, double factor) {
    if (v) *v *= factor;
    return v;
}

/// Sums term(first), term(first+1), ... under the acceptance rule above.
/// Exact zeros (vanishing sines) neither count nor stop the sum.
template <class Term>
std::optional<double> sum_series(Term term, int first, int max_terms = 400) {
    double sum = 0.0, biggest = 0.0;
    for (int j = first; j < first + max_terms; ++j) {
        const double a = term(j);
        if (a == 0.0) continue;
        if (!std::isfinite(a)) return std::nullopt;
        sum += a;
        biggest = std::max(biggest, std::abs(a));
        if (biggest > 1e3 * std::abs(sum) && j > first + 2) return std::nullopt;
        if (std::abs(a) <= 1e-16 * std::abs(sum)) return biggest <= 1e3 * std::abs(sum) ? std::optional(sum) : std::nullopt;
    }
    return std::nullopt;
}

inline void check_quadrature(double value, double err, const char* what) {
    if (!std::isfinite(value) || (err > kernel_tol && err > 1e-8 * std::abs(value)))
        throw ComputationError(std::string(what) + ": quadrature tolerance not met (estimate " + std::to_string(err) +
                               ", value " + std::to_string(value) + ")");
}

inline boost::math::quadrature::exp_sinh<double>& half_line() {
    thread_local boost::math::quadrature::exp_sinh<double> q;
    return q;
}

inline boost::math::quadrature::tanh_sinh<double>& finite_de() {
    thread_local boost::math::quadrature::tanh_sinh<double> q;
    return q;
}

template <class F>
double integrate_half_line(F f, const char* what) {
    double err = 0.0, l1 = 0.0;
    const double v = half_line().integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13, &err, &l1);
    check_quadrature(v, err, what);
    return v;
}

/// int_0^X f over panels of width `panel`, Gauss-Kronrod on each; the first
/// panel goes to tanh-sinh because of the xi^{2s} cusp at the origin.
template <class F>
double integrate_panels(F f, double X, double panel, const char* what) {
    double total = 0.0, err_total = 0.0;
    double a = 0.0;
    bool first = true;
    while (a < X) {
        const double b = std::min(X, a + panel);
        double err = 0.0;
        if (first) {
            double l1 = 0.0;
            total += finite_de().integrate(f, a, b, 1e-14, &err, &l1);
            first = false;
        } else {
            total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 8, 1e-12, &err);
        }
        err_total += err;
        a = b;
    }
    check_quadrature(total, err_total, what);
    return total;
}

/// (sin x - x cos x) / x^2, accurate for small x.
inline double sin_minus_xcos_over_x2(double x) {
    if (std::abs(x) < 0.05) {
        const double x2 = x * x;
        return x * (1.0 / 3.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 840.0 - x2 / 45360.0)));
    }
    return (std::sin(x) - x * std::cos(x)) / (x * x);
}

/// 1 - e^{-x} - x e^{-x}.
inline double one_minus_exp_poly(double x) {
    if (x < 0.05) {
        double term = x * x / 2.0, sum = 0.0;
        for (int k = 2; k < 14; ++k) {
            sum += term * (k - 1);
            term *= -x / (k + 1);
        }
        return sum;
    }
    return -std::expm1(-x) - x * std::exp(-x);
}

/// 1 - x K_1(x).
inline double one_minus_xk1(double x) {
    if (x < 0.5) {
        const double q = x * x / 4.0, L = 2.0 * std::log(x / 2.0);
        double sum = 0.0, pw = q, fact = 1.0;  // pw = q^{k+1}, fact = k!(k+1)!
        for (int k = 0; k < 30; ++k) {
            const double term = pw / fact * (L - boost::math::digamma(k + 1.0) - boost::math::digamma(k + 2.0));
            sum -= term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
            pw *= q;
            fact *= (k + 1.0) * (k + 2.0);
        }
        return sum;
    }
    return 1.0 - x * boost::math::cyl_bessel_k(1, x);
}

/// c_n of the Poisson kernel c_n t / (t^2 + r^2)^{(n+1)/2}, fixed by unit
/// mass with a radial quadrature.
inline double poisson_constant(int n) {
    static const std::array<double, 3> c = [] {
        std::array<double, 3> out{};
        for (int d = 1; d <= 3; ++d) {
            const double area = sphere_area(d);
            const double mass = integrate_half_line(
                [&](double r) { return area * std::pow(r, d - 1) * std::pow(1.0 + r * r, -0.5 * (d + 1)); },
                "Poisson kernel normalization");
            out[d - 1] = 1.0 / mass;
        }
        return out;
    }();
    return c[n - 1];
}

struct StableProfile {
    double s, alpha, t;
    int n;

    StableProfile(double s_, int n_, double t_) : s(s_), alpha(2.0 * s_), t(t_), n(n_) {}

    // Power series around r = 0.
    std::optional<double> density_near(double r) const {
        const double pref = 1.0 / (std::pow(2.0, n - 1) * std::pow(std::numbers::pi, 0.5 * n) * std::tgamma(0.5 * n) * alpha);
        if (r == 0.0) return pref * std::tgamma(n / alpha) * std::pow(t, -n / alpha);
        const double q = r * r / 4.0;
        return scaled(sum_series(
            [&](int j) {
                const double e = (n + 2.0 * j) / alpha;
                double lt = std::lgamma(e) - e * std::log(t) - std::lgamma(j + 1.0) -
                            (std::lgamma(0.5 * n + j) - std::lgamma(0.5 * n));
                if (j > 0) lt += j * std::log(q);
                return (j % 2 ? -1.0 : 1.0) * std::exp(lt);
            },
            0), pref);
    }

    std::optional<double> mass_near(double rho) const {
        const double pref = 2.0 / (std::pow(2.0, n - 1) * std::tgamma(0.5 * n) * std::tgamma(0.5 * n) * alpha);
        const double q = rho * rho / 4.0;
        return scaled(sum_series(
            [&](int j) {
                const double e = (n + 2.0 * j) / alpha;
                double lt = std::lgamma(e) - e * std::log(t) - std::lgamma(j + 1.0) -
                            (std::lgamma(0.5 * n + j) - std::lgamma(0.5 * n)) + n * std::log(rho) -
                            std::log(n + 2.0 * j);
                if (j > 0) lt += j * std::log(q);
                return (j % 2 ? -1.0 : 1.0) * std::exp(lt);
            },
            0), pref);
    }

    // log of |2^{ak} Gamma(1+ak/2) Gamma((n+ak)/2) t^k / k!| and the sign of
    // sin(pi a k/2) (-1)^{k+1}; shared by the far-field series.
    std::pair<double, double> far_term(int k) const {
        const double ak = alpha * k;
        const double sn = boost::math::sin_pi(ak / 2.0);
        const double lt = ak * std::log(2.0) + std::lgamma(1.0 + ak / 2.0) + std::lgamma((n + ak) / 2.0) +
                          k * std::log(t) - std::lgamma(k + 1.0);
        return {lt, (k % 2 ? 1.0 : -1.0) * sn};
    }

    std::optional<double> density_far(double r) const {
        if (r <= 0.0) return std::nullopt;
        const double pref = std::pow(std::numbers::pi, -0.5 * n - 1.0) * std::pow(r, -n);
        return scaled(sum_series(
                   [&](int k) {
                       const auto [lt, sg] = far_term(k);
                       return sg == 0.0 ? 0.0 : sg * std::exp(lt - alpha * k * std::log(r));
                   },
                   1), pref);
    }

    /// Mass outside the ball of radius rho.
    std::optional<double> tail_far(double rho) const {
        if (rho <= 0.0) return std::nullopt;
        const double pref = 2.0 / (std::tgamma(0.5 * n) * std::numbers::pi);
        return scaled(sum_series(
                   [&](int k) {
                       const auto [lt, sg] = far_term(k);
                       return sg == 0.0 ? 0.0 : sg * std::exp(lt - alpha * k * std::log(rho)) / (alpha * k);
                   },
                   1), pref);
    }

    // g(y) = Im-part weight of exp(-t (iy)^{2s}) on the rotated contour.
    double rotated_weight(double y) const {
        const double ya = t * std::pow(y, alpha);
        const double phase = std::numbers::pi * alpha / 2.0;
        return std::exp(-ya * std::cos(phase)) * std::sin(ya * std::sin(phase));
    }

    double density_rotated(double r) const {
        constexpr double pi = std::numbers::pi;
        switch (n) {
            case 1:
                return integrate_half_line([&](double y) { return std::exp(-r * y) * rotated_weight(y); }, "kernel") / pi;
            case 2:
                return integrate_half_line(
                           [&](double y) {
                               return y > 0.0 ? y * boost::math::cyl_bessel_k(0, r * y) * rotated_weight(y) : 0.0;
                           },
                           "kernel") /
                       (pi * pi);
            default:
                // int y g(y) dy = 0, so for small r the e^{-ry} form cancels;
                // subtracting it first keeps both ends accurate.
                if (r >= 1.0)
                    return integrate_half_line([&](double y) { return y * std::exp(-r * y) * rotated_weight(y); },
                                               "kernel") /
                           (2.0 * pi * pi * r);
                return -integrate_half_line(
                           [&](double y) {
                               const double w = r > 0.0 ? -std::expm1(-r * y) / r : y;
                               return y * w * rotated_weight(y);
                           },
                           "kernel") /
                       (2.0 * pi * pi);
        }
    }

    double mass_rotated(double rho) const {
        return integrate_half_line(
                   [&](double y) {
                       if (y <= 0.0) return 0.0;
                       const double x = rho * y;
                       const double w = n == 1 ? -std::expm1(-x) : n == 2 ? one_minus_xk1(x) : one_minus_exp_poly(x);
                       return rotated_weight(y) * w / y;
                   },
                   "ball mass") *
               2.0 / std::numbers::pi;
    }

    double cutoff() const { return std::pow(42.0 / t, 1.0 / alpha); }

    double density_direct(double r) const {
        constexpr double pi = std::numbers::pi;
        const double X = cutoff(), panel = std::min(X, pi / std::max(r, 1e-3));
        auto e = [&](double xi) { return std::exp(-t * std::pow(xi, alpha)); };
        switch (n) {
            case 1:
                return integrate_panels([&](double xi) { return e(xi) * std::cos(r * xi); }, X, panel, "kernel") / pi;
            case 2:
                return integrate_panels(
                           [&](double xi) { return e(xi) * boost::math::cyl_bessel_j(0, r * xi) * xi; }, X, panel,
                           "kernel") /
                       (2.0 * pi);
            default:
                return integrate_panels([&](double xi) { return e(xi) * xi * std::sin(r * xi); }, X, panel, "kernel") /
                       (2.0 * pi * pi * r);
        }
    }

    double mass_direct(double rho) const {
        constexpr double pi = std::numbers::pi;
        const double X = cutoff(), panel = std::min(X, pi / std::max(rho, 1e-3));
        auto e = [&](double xi) { return std::exp(-t * std::pow(xi, alpha)); };
        switch (n) {
            case 1:
                return integrate_panels(
                           [&](double xi) { return xi > 0.0 ? e(xi) * std::sin(rho * xi) / xi : rho; }, X, panel,
                           "ball mass") *
                       2.0 / pi;
            case 2:
                return rho * integrate_panels([&](double xi) { return e(xi) * boost::math::cyl_bessel_j(1, rho * xi); },
                                              X, panel, "ball mass");
            default:
                return integrate_panels([&](double xi) { return e(xi) * xi * sin_minus_xcos_over_x2(rho * xi); }, X,
                                        panel, "ball mass") *
                       2.0 * rho * rho / pi;
        }
    }

    double density(double r) const {
        if (auto v = density_near(r)) return *v;
        if (auto v = density_far(r)) return *v;
        return alpha < 1.0 ? density_rotated(r) : density_direct(r);
    }

    double mass(double rho) const {
        if (auto v = mass_near(rho)) return *v;
        if (auto v = tail_far(rho)) return 1.0 - *v;
        return alpha < 1.0 ? mass_rotated(rho) : mass_direct(rho);
    }
};

/// int_0^rho |S^{n-1}| r^{n-1} density(r) dr by adaptive Gauss-Kronrod,
/// integrated over r = rho x, x in [0, 1], so that Boost's error floor
/// (relative to the integrand height) stays relative to the result.
template <class F>
double radial_mass(F density, int n, double rho) {
    const double area = sphere_area(n);
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double x) { return area * std::pow(rho, n) * std::pow(x, n - 1) * density(rho * x); }, 0.0, 1.0, 15,
        1e-12, &err);
    check_quadrature(v, err, "ball mass");
    return v;
}

}  // namespace detail

/// G_s(r, t) in R^n, r = |x|. Strictly positive for finite r.
inline double kernel_value(double s, int n, double r, double t) {
    detail::check_kernel_args(s, n, t);
    require(std::isfinite(r) && r >= 0.0, "radius must be >= 0");
    constexpr double pi = std::numbers::pi;
    if (s == 1.0) return std::pow(4.0 * pi * t, -0.5 * n) * std::exp(-r * r / (4.0 * t));
    if (s == 0.5) return detail::poisson_constant(n) * t * std::pow(t * t + r * r, -0.5 * (n + 1));
    return detail::StableProfile(s, n, t).density(r);
}

/// Mass of G_s(., t) in the ball of radius rho, i.e. P(|X_t| < rho).
inline double ball_mass(double s, int n, double rho, double t) {
    detail::check_kernel_args(s, n, t);
    require(std::isfinite(rho) && rho > 0.0, "ball radius must be > 0");
    if (s == 1.0) {
        // Beyond 60 sqrt(t) the Gaussian carries less than e^{-900}.
        const double R = std::min(rho, 60.0 * std::sqrt(t));
        return std::min(1.0, detail::radial_mass([&](double r) { return kernel_value(1.0, n, r, t); }, n, R));
    }
    if (s == 0.5) {
        if (rho <= t) return detail::radial_mass([&](double r) { return kernel_value(0.5, n, r, t); }, n, rho);
        double err = 0.0, l1 = 0.0;
        const double area = detail::sphere_area(n);
        const double tail = detail::half_line().integrate(
            [&](double u) { return area * std::pow(rho + u, n - 1) * kernel_value(0.5, n, rho + u, t); }, 0.0,
            std::numeric_limits<double>::infinity(), 1e-13, &err, &l1);
        detail::check_quadrature(tail, err, "ball mass");
        return 1.0 - tail;
    }
    return detail::StableProfile(s, n, t).mass(rho);
}

}  // namespace decaylab
