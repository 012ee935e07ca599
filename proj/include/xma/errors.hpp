#pragma once

#include <stdexcept>
#include <string>

namespace xma {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Mismatched dimensions, out-of-range indices, malformed arguments.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Mathematically degenerate input (zero norm, empty set, undefined mean).
class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& msg) : Error(msg) {}
};

// Non-finite values where finite arithmetic is required.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Configuration file problems: unknown key, unparsable value.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// File-level I/O failures.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// The three distinct corruption classes for binary formats.
class BadMagicError : public IoError {
public:
    explicit BadMagicError(const std::string& msg) : IoError(msg) {}
};

class VersionMismatchError : public IoError {
public:
    explicit VersionMismatchError(const std::string& msg) : IoError(msg) {}
};

class TruncatedFileError : public IoError {
public:
    explicit TruncatedFileError(const std::string& msg) : IoError(msg) {}
};

} // namespace xma
