#pragma once

#include <stdexcept>
#include <string>

namespace gradvi {

/// Thrown on contract violations: bad inputs, dimension mismatches, malformed files.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gradvi
