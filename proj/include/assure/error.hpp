// error.hpp
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace assure {

// Base of every error the library throws. `code()` is a short machine-readable
// tag; the CLI prints it as `ERROR <code>: <what()>`.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(detail), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Argument outside the mathematical domain (non-finite input, variance <= 0, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& detail, std::string code = "domain")
        : Error(std::move(code), detail) {}
};

// Caller violated an operation's precondition (beta outside box, n < 3, ...).
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& detail, std::string code = "precondition")
        : Error(std::move(code), detail) {}
};

// Operation not defined for this input kind (e.g. derivatives of a finite family).
class UnsupportedError : public Error {
public:
    explicit UnsupportedError(const std::string& detail)
        : Error("unsupported", detail) {}
};

// Malformed input file. `line()` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(std::string code, std::size_t line, const std::string& detail)
        : Error(std::move(code), line ? "line " + std::to_string(line) + ": " + detail : detail),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace assure
