#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "decaylab/kernels/heat_kernel.hpp"
#include "decaylab/kernels/walk.hpp"

namespace decaylab {

struct KernelCheck {
    std::string group;  // unit_mass, scaling, point_value, positivity
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

inline constexpr double validate_s_grid[] = {0.25, 0.5, 0.75, 1.0};

/// The kernel property suite: unit mass at rho = 1e6, the scaling identity
/// at 20 random points per (s, n), the s = 1/2 and s = 1 values at the
/// origin, and positivity at 1000 random points per (s, n).
inline std::vector<KernelCheck> validate_kernels(std::uint64_t seed = 1) {
    constexpr double pi = std::numbers::pi;
    std::vector<KernelCheck> out;
    std::mt19937_64 rng(seed);
    auto uniform = [&](double a, double b) { return a + (b - a) * detail::open_uniform(rng); };
    auto label = [](double s, int n) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "s=%g n=%d", s, n);
        return std::string(buf);
    };

    for (double s : validate_s_grid)
        for (int n = 1; n <= 3; ++n) {
            const double err = std::abs(ball_mass(s, n, 1e6, 1.0) - 1.0);
            out.push_back({"unit_mass", label(s, n) + " rho=1e6", err, 1e-4, err <= 1e-4});
        }

    for (double s : validate_s_grid)
        for (int n = 1; n <= 3; ++n) {
            double worst = 0.0;
            for (int i = 0; i < 20; ++i) {
                const double r = uniform(0.0, 4.0);
                const double t = std::exp(uniform(std::log(0.1), std::log(10.0)));
                const double direct = kernel_value(s, n, r, t);
                const double via_unit = std::pow(t, -n / (2.0 * s)) * kernel_value(s, n, r * std::pow(t, -1.0 / (2.0 * s)), 1.0);
                worst = std::max(worst, std::abs(direct - via_unit) / std::abs(via_unit));
            }
            out.push_back({"scaling", label(s, n) + " 20 points", worst, 1e-8, worst <= 1e-8});
        }

    {
        const double err = std::abs(kernel_value(0.5, 1, 0.0, 1.0) - 1.0 / pi);
        out.push_back({"point_value", "s=0.5 n=1 G(0,1) = 1/pi", err, 1e-8, err <= 1e-8});
        const double err1 = std::abs(kernel_value(1.0, 1, 0.0, 1.0) - 1.0 / std::sqrt(4.0 * pi));
        out.push_back({"point_value", "s=1 n=1 G(0,1) = (4 pi)^-1/2", err1, 1e-8, err1 <= 1e-8});
    }

    for (double s : validate_s_grid)
        for (int n = 1; n <= 3; ++n) {
            double smallest = std::numeric_limits<double>::infinity();
            for (int i = 0; i < 1000; ++i) {
                // r <= 10 keeps the Gaussian above the double underflow threshold.
                const double r = std::exp(uniform(std::log(1e-3), std::log(10.0)));
                const double t = std::exp(uniform(std::log(0.1), std::log(10.0)));
                smallest = std::min(smallest, kernel_value(s, n, r, t));
            }
            out.push_back({"positivity", label(s, n) + " 1000 points (min value)", smallest, 0.0, smallest > 0.0});
        }
    return out;
}

}  // namespace decaylab
