#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bfvar {

// Invalid input: bad arguments, unparsable hypotheses, inconsistent data.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Hypothesis text that does not match the grammar. position is 0-based.
class ParseError : public DomainError {
public:
    ParseError(const std::string& msg, std::size_t position)
        : DomainError(msg + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// A computation that could not reach its accuracy target.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bfvar
