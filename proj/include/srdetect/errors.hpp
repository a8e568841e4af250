#ifndef SRDETECT_ERRORS_HPP
#define SRDETECT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace srd {

// Bad user input: unknown model, out-of-range option, r >= A, missing seed.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine could not deliver its contract (singular system,
// non-convergent iteration, insufficient resolution).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Threshold calibration failed to bracket or converge.
class CalibrationError : public NumericalError {
public:
    explicit CalibrationError(const std::string& what) : NumericalError(what) {}
};

// Model lacks what an algorithm needs (e.g. differentiable likelihood-ratio cdf).
class UnsupportedModelError : public std::runtime_error {
public:
    explicit UnsupportedModelError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace srd

#endif
