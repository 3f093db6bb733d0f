#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgdedup {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

class SpecError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class PlanError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class StoreError : public Error {
public:
    using Error::Error;
};

class StrategyError : public Error {
public:
    using Error::Error;
};

class SpaceTooLarge : public StrategyError {
public:
    using StrategyError::StrategyError;
};

// Collects non-fatal warnings (unknown datatypes, skipped standardizers).
struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

inline void warn(Diagnostics* diag, std::string msg) {
    if (diag) diag->warn(std::move(msg));
}

}  // namespace kgdedup
