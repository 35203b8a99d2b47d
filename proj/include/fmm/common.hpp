#pragma once

#include <stdexcept>
#include <string>

namespace fmm {

// Bad input data (malformed files, impossible values, missing users).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A caller broke a documented precondition or an internal invariant failed.
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace fmm
