#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vli {

// Base for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed textual input; `offset` is the byte position of the problem.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg + " (at byte " + std::to_string(offset) + ")"), offset(offset) {}
    std::size_t offset;
};

// A value violates a type invariant or precondition.
struct ValidationError : Error {
    using Error::Error;
};

// Bad configuration: unknown names, broken plans, unusable lexicons.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace vli
