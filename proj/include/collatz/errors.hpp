#pragma once

#include <stdexcept>
#include <string>

namespace collatz {

// An iterative computation hit its step cap and cannot answer.
struct CapExceededError : std::runtime_error {
    explicit CapExceededError(const std::string& what) : std::runtime_error(what) {}
};

// A template enumeration would exceed the configured residue budget.
struct BudgetExceededError : std::runtime_error {
    explicit BudgetExceededError(const std::string& what) : std::runtime_error(what) {}
};

// An on-disk artifact (template cache, checkpoint) is malformed or inconsistent.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem-level failure (open/read/write).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace collatz
