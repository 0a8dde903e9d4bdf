#pragma once

#include <stdexcept>
#include <string>

namespace latree {

// Error taxonomy shared by the library, the C API and the CLI exit codes.
enum class ErrorKind {
    Input = 2,      // malformed input, precondition violation, size cap
    OffModel = 3,   // data inconsistent with any model point beyond tolerance
    Internal = 4,   // broken internal invariant
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct InputError : Error {
    explicit InputError(const std::string& msg) : Error(ErrorKind::Input, msg) {}
};

struct OffModelError : Error {
    explicit OffModelError(const std::string& msg) : Error(ErrorKind::OffModel, msg) {}
};

struct InternalError : Error {
    explicit InternalError(const std::string& msg) : Error(ErrorKind::Internal, msg) {}
};

} // namespace latree
