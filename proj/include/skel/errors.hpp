#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skel {

/// Base class for every error raised by the library. `kind()` is the
/// machine-readable tag used in CLI error records.
class Error : public std::runtime_error {
public:
    Error(std::string_view kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    std::string_view kind() const noexcept { return kind_; }

private:
    std::string_view kind_;
};

/// Caller violated an operation's precondition.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& message) : Error("usage", message) {}
};

/// Input data is malformed, out of range or non-finite.
class DataError : public Error {
public:
    explicit DataError(const std::string& message) : Error("data", message) {}
};

/// A factorization failed even after jitter escalation.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& message) : Error("numeric", message) {}
};

/// Invalid or infeasible configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config", message) {}
};

/// Persisted container is corrupt or has an unsupported version.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& message) : Error("format", message) {}
};

/// Filesystem failure (unwritable directory, missing file).
class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace skel
