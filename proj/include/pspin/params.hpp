#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pspin {

// Thrown when an algorithm fails numerically (bracket failure, non-convergence).
// The CLI maps it to exit code 3; invalid configuration maps to 2.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Interaction degree p and ambient dimension N. Everything downstream hangs off this pair.
struct ModelParams {
    int p = 3;
    int N = 2;

    void validate() const {
        if (p < 3) throw std::invalid_argument("p must be >= 3 (pure 2-spin is out of scope)");
        if (N < 2) throw std::invalid_argument("N must be >= 2");
    }
};

}  // namespace pspin
