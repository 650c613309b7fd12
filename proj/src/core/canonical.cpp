#include "sscope/core/canonical.hpp"

#include <cmath>

#include <openssl/evp.h>

#include "sscope/core/error.hpp"

namespace sscope {
namespace {

void require_finite(const json& value) {
    switch (value.type()) {
    case json::value_t::number_float:
        if (!std::isfinite(value.get<double>()))
            throw Error(Errc::invalid_argument, "non-canonical value");
        break;
    case json::value_t::object:
    case json::value_t::array:
        for (const auto& child : value) require_finite(child);
        break;
    case json::value_t::binary:
    case json::value_t::discarded:
        throw Error(Errc::invalid_argument, "non-canonical value");
    default:
        break;
    }
}

}  // namespace

std::string canonical_encode(const json& value) {
    require_finite(value);
    try {
        return value.dump(-1, ' ', false, json::error_handler_t::strict);
    } catch (const json::type_error&) {
        throw Error(Errc::invalid_argument, "non-canonical value", "invalid UTF-8");
    }
}

std::string canonical_hash(const json& value) { return sha256_hex(canonical_encode(value)); }

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw Error(Errc::internal, "sha256 failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0f]);
    }
    return out;
}

}  // namespace sscope
