#pragma once

#include <stdexcept>
#include <string>

namespace drf {

// Bad user input: malformed config, missing file, shape mismatch at the API
// boundary. The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure at runtime (divergence, non-finite loss). CLI exit code 2.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace drf
