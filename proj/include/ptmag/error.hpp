#pragma once

#include <stdexcept>
#include <string>

namespace ptmag {

/// Invalid input to a library call (precondition violation).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or out-of-range scenario configuration. `key()` names the
/// offending key when one is known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Integration blew up or a spectral computation had no meaningful answer.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ptmag
