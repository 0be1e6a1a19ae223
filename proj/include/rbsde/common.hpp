#pragma once

#include <stdexcept>
#include <string>

namespace rbsde {

/// Base class of every error this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace rbsde
