#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace spinsim {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Strict parse of a complete decimal token; nullopt-like failure via bool.
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, long long& out);

std::string_view trim(std::string_view s);

/// 64-bit FNV-1a, used for configuration fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace spinsim
