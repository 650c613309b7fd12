#pragma once

#include <string>
#include <string_view>

#include "sscope/core/types.hpp"

namespace sscope {

// Canonical text encoding of a parameter tree: object keys sorted bytewise,
// no insignificant whitespace, UTF-8. Integers and reals keep their JSON
// type, so 1 and 1.0 encode differently.
// Throws Error(invalid_argument, "non-canonical value") for NaN/Inf or
// invalid UTF-8.
std::string canonical_encode(const json& value);

// Hex SHA-256 of canonical_encode(value).
std::string canonical_hash(const json& value);

std::string sha256_hex(std::string_view bytes);

}  // namespace sscope
