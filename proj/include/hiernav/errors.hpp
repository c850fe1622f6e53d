#pragma once

#include <stdexcept>
#include <string>

namespace hiernav {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input/parameter shapes do not line up (vector dims, layer sizes, ...).
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// NaN/Inf showed up where a finite value is required.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Malformed text input (maze files, configs). Carries 1-based line/column
// when they are known; 0 means "not applicable".
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line = 0, int column = 0)
        : Error(format(msg, line, column)), line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    static std::string format(const std::string& msg, int line, int column) {
        if (line <= 0) return msg;
        std::string s = msg + " (line " + std::to_string(line);
        if (column > 0) s += ", column " + std::to_string(column);
        return s + ")";
    }
    int line_;
    int column_;
};

// Bad or unknown configuration key/value.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// An operation was called in a state its contract forbids.
class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& msg) : Error(msg) {}
};

// A dataset ended up empty where a nonempty one is required.
class EmptyDatasetError : public Error {
public:
    explicit EmptyDatasetError(const std::string& msg) : Error(msg) {}
};

// Training diverged (non-finite loss or parameters).
class TrainingError : public Error {
public:
    explicit TrainingError(const std::string& msg) : Error(msg) {}
};

}  // namespace hiernav
