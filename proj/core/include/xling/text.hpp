#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace xling {

/// Unicode-aware lowercasing of UTF-8 text.
std::string utf8_lower(std::string_view text);

bool is_valid_utf8(std::string_view text);

/// Strips a trailing CR left by CRLF input.
inline std::string_view chomp(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

std::string_view trim(std::string_view text);

/// Splits on any run of spaces and tabs.
std::vector<std::string_view> split_ws(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Three lowercase ASCII letters.
bool is_iso639_3(std::string_view code);

}  // namespace xling
