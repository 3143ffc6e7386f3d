#pragma once

#include <stdexcept>
#include <string>

namespace hwm {

// Exit-code contract: 0 success, 2 configuration, 3 numerical failure, 4 I/O.
// Every thrown error carries the exit code its category maps to; main() is the
// only place that turns exceptions into process exit codes.

class Error : public std::runtime_error {
public:
    Error(std::string msg, int code) : std::runtime_error(std::move(msg)), code_(code) {}
    int exit_code() const { return code_; }

private:
    int code_;
};

// Bad config / schema violations / resource caps chosen by configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg, 2) {}
};

// Runtime numerical failures: blow-up, NaN, off-manifold input, divergence.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg, 3) {}
};

// Domain errors are numerical failures triggered by invalid operand state
// (null vector projection, off-sheet point, nonzero mean where forbidden).
class DomainError : public NumericError {
public:
    explicit DomainError(const std::string& msg) : NumericError(msg) {}
};

// File-system and snapshot-format failures. The reason enum keeps the three
// snapshot failure modes distinguishable for callers and tests.
class IoError : public Error {
public:
    enum class Reason { Generic, BadMagic, Truncated, LengthMismatch };

    explicit IoError(const std::string& msg, Reason r = Reason::Generic)
        : Error(msg, 4), reason_(r) {}
    Reason reason() const { return reason_; }

private:
    Reason reason_;
};

} // namespace hwm
