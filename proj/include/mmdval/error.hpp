#pragma once

#include <stdexcept>
#include <string>

namespace mmdval {

// Bad user input: malformed files, out-of-range parameters, violated preconditions.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A postcondition or internal invariant did not hold.
class InvariantError : public std::logic_error {
public:
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

} // namespace mmdval
