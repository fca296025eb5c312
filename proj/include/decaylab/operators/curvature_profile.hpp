#pragma once

// The profile F(r) = \int_0^r (1+t^2)^{-(n+1+s)/2} dt of the fractional mean
// curvature operator (n = 1), and the exterior tail integral built from it.

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "decaylab/error.hpp"

namespace decaylab::detail {

class CurvatureProfile {
public:
    static constexpr int table_points = 2048;

    explicit CurvatureProfile(double s) : s_(s) {
        require(s > 0.0 && s < 1.0, "s must lie in (0,1)");
        // With t = tan(theta): F(r) = \int_0^{atan r} cos(theta)^s dtheta.
        dtheta_ = (std::numbers::pi / 2) / (table_points - 1);
        F_inf_ = std::sqrt(std::numbers::pi) * std::tgamma((s + 1.0) / 2.0) / (2.0 * std::tgamma(s / 2.0 + 1.0));
        values_.assign(table_points, 0.0);
        slopes_.assign(table_points, 0.0);
        using GL = boost::math::quadrature::gauss<double, 10>;
        for (int k = 0; k < table_points; ++k) slopes_[k] = density(k * dtheta_);
        for (int k = 1; k < table_points - 1; ++k)
            values_[k] = values_[k - 1] + GL::integrate([&](double th) { return density(th); }, (k - 1) * dtheta_,
                                                        k * dtheta_);
        values_.back() = F_inf_;
    }

    double s() const { return s_; }
    double saturation() const { return F_inf_; }

    /// F(r), odd, increasing, F(+-inf) = +-saturation().
    double operator()(double r) const {
        if (r == 0.0) return 0.0;
        if (std::isinf(r)) return std::copysign(F_inf_, r);
        const double th = std::atan(std::abs(r));
        double pos = th / dtheta_;
        int k = static_cast<int>(pos);
        if (k >= table_points - 1) return std::copysign(F_inf_, r);
        const double t = pos - k;
        // Cubic Hermite on [theta_k, theta_{k+1}] with exact slopes.
        const double y0 = values_[k], y1 = values_[k + 1];
        const double m0 = slopes_[k] * dtheta_, m1 = slopes_[k + 1] * dtheta_;
        const double t2 = t * t, t3 = t2 * t;
        const double v = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
        return std::copysign(v, r);
    }

    /// F(r)/r with its limit 1 at r = 0.
    double secant(double r) const {
        if (std::abs(r) < 1e-6) return 1.0 - (s_ + 2.0) / 6.0 * r * r;
        return (*this)(r) / r;
    }

    /// \int_D^\infty F(u/r) r^{-1-s} dr, the contribution of one exterior
    /// half-line at distance D where the zero extension holds.
    double tail(double u, double D) const {
        if (u == 0.0) return 0.0;
        const double Z = std::abs(u) / D;
        return std::copysign(std::pow(std::abs(u), -s_) * moment(Z), u);
    }

    /// tail(u, D)/u with its limit D^{-1-s}/(1+s) at u = 0.
    double tail_secant(double u, double D) const {
        const double Z = std::abs(u) / D;
        if (Z < 1e-6) return std::pow(D, -1.0 - s_) / (1.0 + s_);
        return tail(u, D) / u;
    }

private:
    double density(double th) const {
        const double c = std::cos(th);
        return c <= 0.0 ? 0.0 : std::pow(c, s_);
    }

    // E(Z) = \int_0^Z F(z) z^{s-1} dz = (1/s) \int_0^{Z^s} F(v^{1/s}) dv.
    double moment(double Z) const {
        if (Z < 1e-6) return std::pow(Z, 1.0 + s_) / (1.0 + s_);
        using GL = boost::math::quadrature::gauss<double, 20>;
        const double V = std::pow(Z, s_);
        auto f = [&](double v) { return (*this)(std::pow(v, 1.0 / s_)); };
        double lo = 0.0, hi = std::min(V, 1.0), sum = 0.0;
        while (lo < V) {
            sum += GL::integrate(f, lo, hi);
            lo = hi;
            hi = std::min(V, 2.0 * hi);
        }
        return sum / s_;
    }

    double s_;
    double dtheta_ = 0.0;
    double F_inf_ = 0.0;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

}  // namespace decaylab::detail
