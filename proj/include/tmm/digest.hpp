#pragma once

#include <string>

namespace tmm {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(const std::string& data);

}  // namespace tmm
