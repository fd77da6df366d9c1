#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lqcheck {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line, std::size_t col)
        : Error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg), line_(line), col_(col) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return col_; }

private:
    std::size_t line_;
    std::size_t col_;
};

class TypeError : public Error {
public:
    using Error::Error;
};

class SemanticsError : public Error {
public:
    using Error::Error;
};

class DeterminismError : public SemanticsError {
public:
    using SemanticsError::SemanticsError;
};

class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace lqcheck
