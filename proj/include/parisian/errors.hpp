#pragma once

#include <stdexcept>
#include <string>

namespace parisian {

// Requested operation is not supported for this model/kernel configuration.
struct capability_error : std::runtime_error {
    explicit capability_error(const std::string& what) : std::runtime_error(what) {}
};

// Model parameters violate an invariant (e.g. safety loading).
struct model_error : std::invalid_argument {
    explicit model_error(const std::string& what) : std::invalid_argument(what) {}
};

// A quantity that is provably in range came out of range; indicates a
// numerical defect, not a user error.
struct internal_error : std::runtime_error {
    explicit internal_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace parisian
