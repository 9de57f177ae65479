#pragma once

#include <stdexcept>

namespace aggrolab {

// Invalid parameters and configurations use std::invalid_argument.

class ResourceLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace aggrolab
