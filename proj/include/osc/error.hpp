#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace osc {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Raised when a derivative is requested exactly at a non-differentiable point.
class KinkError : public Error {
public:
    KinkError(const std::string& activation, double point)
        : Error("derivative of " + activation + " is undefined at z = " + std::to_string(point)),
          point_(point) {}

    double point() const noexcept { return point_; }

private:
    double point_;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class LabelError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class CorruptRecordError : public FormatError {
public:
    CorruptRecordError(const std::string& what, std::size_t offset)
        : FormatError(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class DivergenceError : public Error {
public:
    explicit DivergenceError(std::size_t batch)
        : Error("non-finite loss in batch " + std::to_string(batch)), batch_(batch) {}

    std::size_t batch() const noexcept { return batch_; }

private:
    std::size_t batch_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace osc
