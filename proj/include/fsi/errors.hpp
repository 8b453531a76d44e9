#pragma once

#include <stdexcept>
#include <string>

namespace fsi {

// Violated mathematical precondition or malformed input.
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// A search or enumeration exceeded its caller-supplied budget. The message
// carries the resource that ran out and the size that would have been needed.
struct budget_error : std::runtime_error {
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fsi
