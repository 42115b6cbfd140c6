#pragma once

#include <stdexcept>
#include <string>

namespace dipa {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed automaton, input sequence or file.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// A state-space cap was exceeded during exploration.
class ResourceLimit : public Error {
public:
    ResourceLimit(const std::string& what, std::size_t cap)
        : Error(what + " exceeded cap of " + std::to_string(cap) + " states"), cap_(cap) {}
    [[nodiscard]] std::size_t cap() const { return cap_; }

private:
    std::size_t cap_;
};

// An operation was called outside its documented domain.
class PreconditionError : public Error {
public:
    using Error::Error;
};

}  // namespace dipa
