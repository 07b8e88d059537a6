#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lorasim::codec {

/// RFC 4648 standard alphabet with '=' padding.
std::string base64_encode(std::span<const std::uint8_t> data);
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text);

constexpr std::size_t base64_length(std::size_t raw) { return 4 * ((raw + 2) / 3); }

bool is_base64_char(std::uint8_t c);

}  // namespace lorasim::codec
