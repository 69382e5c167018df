#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

namespace physhare {

/// Number of fractional digits written for every floating-point value.
inline constexpr int kCanonicalPrecision = 6;

/// Compact JSON with lexicographically sorted keys and every floating-point
/// number printed in fixed notation with kCanonicalPrecision digits. Two
/// documents that compare equal at that precision produce identical bytes.
std::string canonical_dump(const nlohmann::json& doc);

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// Running hash: sha256(previous || bytes).
std::string chain_digest(std::string_view previous, std::string_view bytes);

}  // namespace physhare
