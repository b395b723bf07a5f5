#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scm {

enum class ErrorKind {
    kInvalidArgument,
    kNotFound,
    kPermission,
    kBusy,
    kConfig,
    kUnsupportedVersion,
    kCorruptSnapshot,
    kIntegrity,
    kIo,
    kInternal,
};

std::string_view to_string(ErrorKind kind);

/// Every failure the engine reports carries a kind so callers (the HTTP
/// layer in particular) can map it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(detail), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& detail) {
    throw Error(kind, detail);
}

}  // namespace scm
