#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace finlab {

// syntax / identifier / index problem while parsing an expression
struct ParseError : std::runtime_error {
    std::size_t position;  // byte offset into the source text
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg), position(pos) {}
};

// numeric domain violation raised by the scalar tower itself
// (sqrt/log of a negative value, division by zero, ...)
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// domain violation tagged with the offending subexpression
struct EvalError : std::runtime_error {
    std::string subexpression;
    EvalError(const std::string& msg, std::string subexpr)
        : std::runtime_error(msg), subexpression(std::move(subexpr)) {}
};

// bad model data: degenerate metric, slit-guard violation, unsupported dimension, ...
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// scenario/config file problems (parse errors, schema violations)
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace finlab
