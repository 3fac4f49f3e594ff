#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace landmatch {

/// Library error with a stable machine-readable code alongside the message.
/// Codes are kebab-case identifiers such as "dimension-mismatch" or
/// "insufficient-overlap"; the CLI maps them onto exit codes.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
    throw Error(std::move(code), message);
}

}  // namespace landmatch
