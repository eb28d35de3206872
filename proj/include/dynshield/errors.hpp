#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dynshield {

/// Unknown symbol or state, or two alphabets that were expected to match but do not.
class AlphabetError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A structural invariant of an automaton, game or sample set is violated.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An environment strategy puts mass outside the defined transitions or does not sum to one.
class StrategyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An API was called out of order (e.g. recording a step with no open episode).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : std::runtime_error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason)
    {
    }

    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] const std::string& reason() const { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

} // namespace dynshield
