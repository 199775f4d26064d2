#pragma once

#include <stdexcept>
#include <string>

namespace mfpb {

// Malformed input: bad dimensions, bid > ask, unsupported payoff, etc.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Iteration, node, row or tuple caps exceeded.
class ResourceLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical trouble that the caller should see verbatim (badly scaled rows,
// post-solve certificate checks that fail).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mfpb
