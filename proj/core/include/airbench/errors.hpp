#pragma once

#include <stdexcept>
#include <string>

namespace airbench {

// Error hierarchy shared by the library and the CLI. The exit_code is what
// the CLI returns when the error escapes to main: 2 = configuration,
// 3 = I/O, 4 = numerical failure.
class Error : public std::runtime_error {
public:
    Error(std::string msg, int exit_code)
        : std::runtime_error(std::move(msg)), exit_code_(exit_code) {}
    int exit_code() const { return exit_code_; }

private:
    int exit_code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::string msg) : Error(std::move(msg), 2) {}
};

// Tensor extents do not line up (wrong channel count, bad rank, ...).
class ShapeError : public ConfigError {
public:
    explicit ShapeError(std::string msg) : ConfigError(std::move(msg)) {}
};

// A scalar argument is out of its documented domain.
class ArgumentError : public ConfigError {
public:
    explicit ArgumentError(std::string msg) : ConfigError(std::move(msg)) {}
};

// An operation was called out of order (backward before forward, ...).
class StateError : public ConfigError {
public:
    explicit StateError(std::string msg) : ConfigError(std::move(msg)) {}
};

class IoError : public Error {
public:
    explicit IoError(std::string msg) : Error(std::move(msg), 3) {}
};

class NumericError : public Error {
public:
    explicit NumericError(std::string msg) : Error(std::move(msg), 4) {}
};

} // namespace airbench
