// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#pragma once

#include <stdexcept>
#include <string>

namespace essaylens {

/// Failure category. Each maps to one CLI exit code.
enum class ErrorKind {
    Config = 2,
    Dependency = 3,
    Validation = 4,
    Numeric = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DependencyError : public Error {
public:
    explicit DependencyError(const std::string& what) : Error(ErrorKind::Dependency, what) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

} // namespace essaylens
