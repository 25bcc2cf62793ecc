#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hesitant {

/// Input violates a documented contract (bad value, bad shape, bad key).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file was readable but its content is malformed. Carries the 1-based line.
class ParseError : public ValidationError {
public:
    ParseError(std::size_t line, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what), m_line(line) {}

    std::size_t line() const noexcept { return m_line; }

private:
    std::size_t m_line;
};

/// A statistic is mathematically undefined for the given data.
class UndefinedCorrelation : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hesitant
