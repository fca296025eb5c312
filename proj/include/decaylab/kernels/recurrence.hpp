#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "decaylab/kernels/heat_kernel.hpp"

namespace decaylab {

enum class Recurrence { recurrent, transient };

inline const char* to_string(Recurrence r) { return r == Recurrence::recurrent ? "recurrent" : "transient"; }

/// The 2s-stable walk in R^n returns to every ball infinitely often iff n <= 2s.
inline Recurrence classify_recurrence(int n, double s) {
    require(n >= 1 && n <= 3, "dimension n must be 1, 2 or 3");
    require(std::isfinite(s) && s > 0.0 && s <= 1.0, "s must lie in (0,1]");
    return n <= 2.0 * s ? Recurrence::recurrent : Recurrence::transient;
}

/// Probability of never being in B_rho at the times k = 1..K, assuming the
/// events are independent: prod_k q_k with q_k = 1 - P(|X_k| < rho).
struct RecurrenceEstimate {
    double s = 0.0;
    int n = 1;
    double rho = 0.0;
    int K = 0;
    std::vector<double> q;           // q_k, k = 1..K
    std::vector<double> p;           // 1 - q_k
    std::vector<double> log_prefix;  // log prod_{j<=k} q_j
    double product = 1.0;
    /// Upper bound on -log prod_{k>K} q_k; infinite when n <= 2s.
    double tail_bound = 0.0;
    Recurrence classification = Recurrence::transient;

    double log_product() const { return log_prefix.empty() ? 0.0 : log_prefix.back(); }
    double product_at(int k) const { return k == 0 ? 1.0 : std::exp(log_prefix.at(k - 1)); }
};

/// Bound on sum_{k>K} -log q_k from p_k <= G_s(0,1) |B_rho| k^{-n/(2s)}.
inline double escape_tail_bound(double s, int n, double rho, int K) {
    const double beta = n / (2.0 * s);
    if (beta <= 1.0) return std::numeric_limits<double>::infinity();
    const double c = kernel_value(s, n, 0.0, 1.0) * detail::ball_volume(n, rho);
    const double p_next = c * std::pow(K + 1.0, -beta);
    if (p_next >= 1.0) return std::numeric_limits<double>::infinity();
    // -log(1 - p) <= p / (1 - p_next) for p <= p_next.
    return c * std::pow(static_cast<double>(K), 1.0 - beta) / (beta - 1.0) / (1.0 - p_next);
}

/// Evaluates q_k through the scaling G_s(x, k) = k^{-n/2s} G_s(x k^{-1/2s}, 1),
/// so every factor is a unit-time ball mass.
inline RecurrenceEstimate escape_product(double s, int n, double rho, int K,
                                         std::optional<double> max_tail = std::nullopt) {
    detail::check_kernel_args(s, n, 1.0);
    require(std::isfinite(rho) && rho > 0.0, "ball radius rho must be > 0");
    require(K >= 10, "truncation K must be >= 10");
    RecurrenceEstimate e;
    e.s = s;
    e.n = n;
    e.rho = rho;
    e.K = K;
    e.classification = classify_recurrence(n, s);
    e.tail_bound = escape_tail_bound(s, n, rho, K);
    if (max_tail && !(e.tail_bound <= *max_tail))
        throw std::invalid_argument("K = " + std::to_string(K) + " gives tail bound " + std::to_string(e.tail_bound) +
                                    " above the requested " + std::to_string(*max_tail));
    e.q.reserve(K);
    e.p.reserve(K);
    e.log_prefix.reserve(K);
    const double exponent = -1.0 / (2.0 * s);
    double log_sum = 0.0;
    for (int k = 1; k <= K; ++k) {
        const double pk = std::clamp(ball_mass(s, n, rho * std::pow(k, exponent), 1.0), 0.0, 1.0);
        e.p.push_back(pk);
        e.q.push_back(1.0 - pk);
        log_sum += std::log1p(-pk);
        e.log_prefix.push_back(log_sum);
    }
    e.product = std::exp(log_sum);
    return e;
}

}  // namespace decaylab
