#include "sscope/core/error.hpp"

namespace sscope {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::not_found: return "not_found";
    case Errc::conflict: return "conflict";
    case Errc::unreadable: return "unreadable";
    case Errc::unsupported: return "unsupported";
    case Errc::failed_precondition: return "failed_precondition";
    case Errc::io: return "io";
    case Errc::plugin: return "plugin";
    case Errc::internal: return "internal";
    }
    return "internal";
}

}  // namespace sscope
