#pragma once

#include <cmath>
#include <optional>

#include <json.hpp>

#include "decaylab/kernels/recurrence.hpp"
#include "decaylab/kernels/walk.hpp"

namespace decaylab {

inline nlohmann::ordered_json to_json(const RecurrenceEstimate& e, const std::optional<WalkStats>& mc = std::nullopt) {
    nlohmann::ordered_json j;
    j["version"] = "1";
    j["n"] = e.n;
    j["s"] = e.s;
    j["rho"] = e.rho;
    j["K"] = e.K;
    j["product"] = e.product;
    j["tail_bound"] = std::isfinite(e.tail_bound) ? nlohmann::ordered_json(e.tail_bound) : nlohmann::ordered_json(nullptr);
    j["classification"] = to_string(e.classification);
    if (mc) {
        j["mc"] = {{"trials", mc->trials},
                   {"K", mc->K},
                   {"q_hat", mc->q_hat},
                   {"stderr", mc->stderr_q},
                   {"mean_returns", mc->mean_returns},
                   {"seed", mc->seed}};
    } else {
        j["mc"] = nullptr;
    }
    return j;
}

}  // namespace decaylab
