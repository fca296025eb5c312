#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

#include "decaylab/error.hpp"

namespace decaylab {

// Random variates are built directly from mt19937_64 output rather than the
// std distributions, whose algorithms differ between standard libraries.

/// One increment of the isotropic 2s-stable process at unit time, i.e. the
/// law with characteristic function exp(-|xi|^{2s}). Coordinates past n are 0.
using StableStep = std::array<double, 3>;

namespace detail {

/// Uniform on the open interval (0, 1).
inline double open_uniform(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_exponential(std::mt19937_64& rng) { return -std::log(open_uniform(rng)); }

/// Fills out[0..count) with independent N(0, variance) draws (Box-Muller).
inline void fill_gaussian(std::mt19937_64& rng, double* out, int count, double variance) {
    const double scale = std::sqrt(variance);
    for (int i = 0; i < count; i += 2) {
        const double radius = scale * std::sqrt(-2.0 * std::log(open_uniform(rng)));
        const double angle = 2.0 * std::numbers::pi * open_uniform(rng);
        out[i] = radius * std::cos(angle);
        if (i + 1 < count) out[i + 1] = radius * std::sin(angle);
    }
}

/// Symmetric stable law of index alpha in (0, 2), E exp(i xi X) = exp(-|xi|^alpha),
/// by the Chambers-Mallows-Stuck transform.
inline double symmetric_stable(double alpha, std::mt19937_64& rng) {
    const double v = std::numbers::pi * (open_uniform(rng) - 0.5);
    if (alpha == 1.0) return std::tan(v);
    const double w = standard_exponential(rng);
    return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

/// Positive stable law of index s in (0, 1), E exp(-lambda A) = exp(-lambda^s)
/// (Kanter's representation).
inline double positive_stable(double s, std::mt19937_64& rng) {
    const double pi = std::numbers::pi;
    const double u = open_uniform(rng);
    const double e = standard_exponential(rng);
    const double a = std::sin((1.0 - s) * pi * u) * std::pow(std::sin(s * pi * u), s / (1.0 - s)) /
                     std::pow(std::sin(pi * u), 1.0 / (1.0 - s));
    return std::pow(a / e, (1.0 - s) / s);
}

inline void check_step_args(double s, int n) {
    require(std::isfinite(s) && s > 0.0 && s <= 1.0, "s must lie in (0,1]");
    require(n >= 1 && n <= 3, "dimension n must be 1, 2 or 3");
}

inline StableStep draw_step(double s, int n, std::mt19937_64& rng) {
    StableStep x{0.0, 0.0, 0.0};
    if (s == 1.0) {
        fill_gaussian(rng, x.data(), n, 2.0);
    } else if (n == 1) {
        x[0] = symmetric_stable(2.0 * s, rng);
    } else {
        fill_gaussian(rng, x.data(), n, 2.0 * positive_stable(s, rng));
    }
    return x;
}

}  // namespace detail

/// n = 1 uses the symmetric stable law directly; n >= 2 subordinates a
/// N(0, 2I) vector to a positive s-stable time, which keeps the law
/// rotation invariant. s = 1 is the Gaussian N(0, 2I).
inline StableStep sample_stable_step(double s, int n, std::mt19937_64& rng) {
    detail::check_step_args(s, n);
    return detail::draw_step(s, n, rng);
}

/// The generator for trial `trial` of a run seeded with `seed`; depends on
/// nothing else, so results do not depend on scheduling.
inline std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    return std::mt19937_64(seq);
}

struct WalkStats {
    int n = 1;
    double s = 0.0, rho = 0.0;
    int K = 0;
    long trials = 0;
    std::uint64_t seed = 0;
    long never_returned = 0;
    std::uint64_t total_returns = 0;  // sum over walks of #{k <= K : |X_k| < rho}
    double q_hat = 0.0;
    double stderr_q = 0.0;  // binomial
    double mean_returns = 0.0;
};

/// Runs `trials` walks X_k = sum of k unit-time steps and records, per walk,
/// whether and how often |X_k| < rho for k = 1..K.
inline WalkStats walk_return_stats(int n, double s, double rho, int K, long trials, std::uint64_t seed,
                                   int jobs = 1) {
    require(std::isfinite(rho) && rho >= 0.0, "ball radius rho must be >= 0");
    require(K >= 100, "horizon K must be >= 100");
    require(trials >= 1000, "need at least 1000 trials");
    require(jobs >= 1, "jobs must be >= 1");
    detail::check_step_args(s, n);

    const double rho2 = rho * rho;
    struct Partial {
        long never = 0;
        std::uint64_t returns = 0;
    };
    auto run_range = [&](long first, long stride, Partial& out) {
        for (long trial = first; trial < trials; trial += stride) {
            auto rng = trial_stream(seed, static_cast<std::uint64_t>(trial));
            StableStep pos{0.0, 0.0, 0.0};
            std::uint64_t hits = 0;
            for (int k = 1; k <= K; ++k) {
                const auto step = detail::draw_step(s, n, rng);
                double r2 = 0.0;
                for (int i = 0; i < n; ++i) {
                    pos[i] += step[i];
                    r2 += pos[i] * pos[i];
                }
                if (r2 < rho2) ++hits;
            }
            if (hits == 0) ++out.never;
            out.returns += hits;
        }
    };
    std::vector<Partial> partial(jobs);
    if (jobs == 1) {
        run_range(0, 1, partial[0]);
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(run_range, j, jobs, std::ref(partial[j]));
        for (auto& th : pool) th.join();
    }

    WalkStats w;
    w.n = n;
    w.s = s;
    w.rho = rho;
    w.K = K;
    w.trials = trials;
    w.seed = seed;
    for (const auto& p : partial) {
        w.never_returned += p.never;
        w.total_returns += p.returns;
    }
    const double N = static_cast<double>(trials);
    w.q_hat = w.never_returned / N;
    w.stderr_q = std::sqrt(w.q_hat * (1.0 - w.q_hat) / N);
    w.mean_returns = static_cast<double>(w.total_returns) / N;
    return w;
}

}  // namespace decaylab
