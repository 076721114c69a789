#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qpf {

enum class ErrorKind {
    InvalidArgument,
    IoError,
    FormatError,
    EmptyEmbedding,
    LiftFailure,
    CoverageError,
    NotPeriodic,
};

/// Stable, hyphenated name used on the CLI diagnostic stream.
constexpr std::string_view error_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::IoError: return "io-error";
        case ErrorKind::FormatError: return "format-error";
        case ErrorKind::EmptyEmbedding: return "empty-embedding";
        case ErrorKind::LiftFailure: return "lift-failure";
        case ErrorKind::CoverageError: return "coverage-error";
        case ErrorKind::NotPeriodic: return "not-periodic";
    }
    return "unknown-error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace qpf
