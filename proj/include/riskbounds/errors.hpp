#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace riskbounds {

/// Bad argument or malformed input (NaN, out-of-domain parameter, parse failure).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The quantile levels alpha -/+ 1/(2 n^s) leave (0,1) for the given n.
class FeasibilityError : public std::domain_error {
public:
    FeasibilityError(const std::string& what, std::uint64_t min_feasible_n)
        : std::domain_error(what), min_feasible_n_(min_feasible_n) {}

    std::uint64_t min_feasible_n() const noexcept { return min_feasible_n_; }

private:
    std::uint64_t min_feasible_n_;
};

/// A bound's stated parameter condition does not hold (sigma too large, v_alpha <= mu).
class ConditionViolation : public std::domain_error {
public:
    ConditionViolation(const std::string& what, double threshold)
        : std::domain_error(what), threshold_(threshold) {}

    double threshold() const noexcept { return threshold_; }

private:
    double threshold_;
};

} // namespace riskbounds

namespace riskbounds {

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace riskbounds
