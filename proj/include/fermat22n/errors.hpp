#pragma once

#include <stdexcept>
#include <string>

namespace fermat22n {

// Violated precondition or malformed input. Maps to a usage error (exit 1)
// at the CLI boundary.
class precondition_error : public std::invalid_argument {
public:
    explicit precondition_error(const std::string& what)
        : std::invalid_argument(what) {}
};

// A configured cap was exceeded. Raised instead of ever returning a
// truncated or wrong answer.
class resource_error : public std::runtime_error {
public:
    explicit resource_error(const std::string& what)
        : std::runtime_error(what) {}
};

} // namespace fermat22n
