#pragma once

#include <stdexcept>
#include <string>

namespace modone {

// Thrown when a precision policy cannot certify the requested target
// (e.g. fixed bit count too small for the magnitude of beta*n^alpha, or a
// phase error bound that cannot be met after frequency multiplication).
class PrecisionError : public std::runtime_error {
public:
    explicit PrecisionError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an adaptive computation exceeds its configured resource cap
// (oscillatory-integral panel limit, direct tuple summation budget).
class BudgetError : public std::runtime_error {
public:
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a root cannot be isolated to the requested width, or a sign
// cannot be decided from a non-finite evaluation. Reported, never swallowed.
class ToleranceError : public std::runtime_error {
public:
    explicit ToleranceError(const std::string& what) : std::runtime_error(what) {}
};

// File-format and I/O failures (bad magic, short read, unwritable path).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}
