#pragma once

#include <stdexcept>
#include <string>

namespace vgc {

enum class ErrorKind {
    invalid_argument,
    io,
    format,
    numeric,
    no_signal,
};

class VgcError : public std::runtime_error {
public:
    VgcError(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw VgcError(kind, message);
}

inline void require(bool cond, ErrorKind kind, const std::string& message) {
    if (!cond) raise(kind, message);
}

}  // namespace vgc
