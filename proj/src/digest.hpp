#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace ctcal {

using Digest = std::array<std::uint8_t, 32>;

inline constexpr std::string_view kDigestName = "sha256";

Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(std::string_view text);
std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace ctcal
