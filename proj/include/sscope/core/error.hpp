#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sscope {

enum class Errc {
    invalid_argument,
    not_found,
    conflict,
    unreadable,
    unsupported,
    failed_precondition,
    io,
    plugin,
    internal,
};

std::string_view errc_name(Errc code) noexcept;

// Every failure surfaced by the library is an Error; `detail` carries
// optional diagnostics (plugin stderr tails, offending line numbers).
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, std::string detail = {})
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    Errc code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

}  // namespace sscope
