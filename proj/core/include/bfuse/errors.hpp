#pragma once

#include <stdexcept>
#include <string>

namespace bfuse {

// Base class for every engine error. The CLI maps subclasses to exit codes:
// validation/config/parse/structure -> 1, numeric/io/state -> 2.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: out-of-range values, contract violations, config mistakes.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Graph wiring problems: shape mismatches, missing tags, unknown nodes.
class StructuralError : public Error {
public:
    using Error::Error;
};

// Non-finite values where finite math is required.
class NumericError : public Error {
public:
    using Error::Error;
};

// Operation called out of order (e.g. backward before forward).
class StateError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// File parsing failure; carries the record index and line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, long record = -1, long line = -1)
        : Error(format(msg, record, line)), record_(record), line_(line) {}

    long record() const { return record_; }
    long line() const { return line_; }

private:
    static std::string format(const std::string& msg, long record, long line) {
        std::string out = msg;
        if (record >= 0) out += " (record " + std::to_string(record) + ")";
        if (line >= 0) out += " (line " + std::to_string(line) + ")";
        return out;
    }

    long record_;
    long line_;
};

// Molecule does not fit the raster field of view; carries the extent in angstrom.
class OutOfBoundsError : public ValidationError {
public:
    OutOfBoundsError(const std::string& msg, double extent_x, double extent_y)
        : ValidationError(msg), extent_x_(extent_x), extent_y_(extent_y) {}

    double extent_x() const { return extent_x_; }
    double extent_y() const { return extent_y_; }

private:
    double extent_x_;
    double extent_y_;
};

}  // namespace bfuse
