#pragma once

#include <stdexcept>
#include <string>

namespace restain {

// Bad or inconsistent data: unreadable files, shape mismatches, version
// mismatches. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite losses or activations. Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace restain
