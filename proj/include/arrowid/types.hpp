#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace arrowid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when a linear solve or an optimization step fails numerically.
/// Carries a rough condition-number estimate of the offending system when one
/// is available (zero otherwise).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what, double condition_estimate = 0.0)
        : std::runtime_error(what), condition_estimate_(condition_estimate) {}

    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

/// Raised by file readers on malformed input; line() is the 1-based line
/// number of the offending row (zero when no single line is to blame).
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& what, long line = 0)
        : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

/// A uniformly sampled signal: values[n] is the sample at t = n * dt.
struct TimeSeries {
    double dt = 0.0;  // sample interval, seconds
    Vector values;
};

/// One recorded excitation/response pair sampled on a common clock.
struct Dataset {
    double dt = 0.0;      // sample interval, seconds
    Vector force;         // excitation, newtons
    Vector displacement;  // response, meters
};

/// Throws std::invalid_argument unless s has dt > 0, at least one sample and
/// only finite values.
void validate(const TimeSeries& s, const char* who = "time series");

/// Throws std::invalid_argument unless d has dt > 0 and two equal-length,
/// finite channels of at least two samples.
void validate(const Dataset& d, const char* who = "dataset");

}  // namespace arrowid
