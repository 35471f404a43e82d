#pragma once

#include <stdexcept>
#include <string>

namespace fedcurr {

/// Invalid or inconsistent configuration: bad dimensions, unsupported model/loss
/// combinations, malformed config files. `line()` is 0 when not tied to a file line.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A precondition of an operation does not hold for otherwise well-formed input
/// (step index out of range, empty client, stepsize too large for a bound).
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fedcurr
