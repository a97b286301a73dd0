// errors.hpp
// Error categories shared across the library; the CLI maps them to exit codes.

#pragma once

#include <stdexcept>

namespace teletomo {

// Measurement data cannot support the requested estimate (empty cell,
// incomplete record set). CLI exit code 3.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical procedure failed: singular system, conditioning on a
// zero-probability outcome, degenerate projection input. CLI exit code 4.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace teletomo
