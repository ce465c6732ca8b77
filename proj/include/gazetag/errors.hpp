#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gazetag {

/// Input file does not conform to its schema. Carries the offending line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
          file_(std::move(file)),
          line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// Parsed data violates a cross-row or cross-file constraint.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// The evaluation protocol cannot be constructed from the given data.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Not enough data to compute the requested quantity.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gazetag
