// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace porch {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

std::string to_hex(const Digest& digest);

// Lowercase hex digest, 64 chars.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view data);

// SHA256(SHA256(x)): second pass runs over the 32 raw digest bytes.
std::string double_sha256_hex(std::span<const std::uint8_t> data);
std::string double_sha256_hex(std::string_view data);

} // namespace porch
