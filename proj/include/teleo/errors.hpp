#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace teleo {

/// Malformed input text. `offset` is a byte offset into the input; `line` and
/// `column` are 1-based and filled in by the program parser.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(const std::string& message, std::size_t offset, std::size_t line = 0,
                std::size_t column = 0)
        : std::runtime_error(message), offset_(offset), line_(line), column_(column) {}

    std::size_t offset() const noexcept { return offset_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t offset_;
    std::size_t line_;
    std::size_t column_;
};

/// A TeleoR construct that this implementation deliberately rejects
/// (timed sequences, wait/repeat, relation and function definitions).
class UnsupportedFeature : public SyntaxError {
public:
    using SyntaxError::SyntaxError;
};

/// A name defined twice across type definitions, declarations and procedure
/// signatures.
class DuplicateDefinition : public SyntaxError {
public:
    DuplicateDefinition(const std::string& name, std::size_t offset, std::size_t line,
                        std::size_t column)
        : SyntaxError("duplicate definition of '" + name + "'", offset, line, column),
          name_(name) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Broken precondition inside the library (e.g. matching against a non-ground fact).
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Runtime failure while evaluating a condition or expression.
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace teleo
