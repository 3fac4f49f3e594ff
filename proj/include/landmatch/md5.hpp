#pragma once

#include <string>
#include <string_view>

namespace landmatch {

/// MD5 digest as a lowercase hex string. Used only to populate and validate
/// the x3p checksum members; not a security primitive.
std::string md5_hex(std::string_view data);

}  // namespace landmatch
