#pragma once

#include <stdexcept>
#include <string>

namespace lyapsim {

// Bad arguments: dimension mismatch, non-Hermitian matrix, invalid spec.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Integration or eigensolver failure (non-finite values, norm drift, no convergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Config schema violation. The message starts with the offending key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key_path, const std::string& what)
        : std::runtime_error(key_path + ": " + what), key_path_(std::move(key_path)) {}

    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lyapsim
