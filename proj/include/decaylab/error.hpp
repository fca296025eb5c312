#pragma once

#include <stdexcept>
#include <string>

namespace decaylab {

// Precondition violations (bad parameters, mismatched grids) throw
// std::invalid_argument; numerical breakdowns throw ComputationError.
class ComputationError : public std::runtime_error {
public:
    explicit ComputationError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw std::invalid_argument(message);
}

}  // namespace decaylab
