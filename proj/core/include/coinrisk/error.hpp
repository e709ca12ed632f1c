#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coinrisk {

/// Input text could not be parsed. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    /// Prefix an existing error with context (e.g. a file path), keeping the line.
    ParseError(const std::string& context, const ParseError& inner)
        : std::runtime_error(context + ": " + inner.what()), line_(inner.line()) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A computation produced a non-finite or otherwise unusable value
/// (singular regression, non-positive variance, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace coinrisk
