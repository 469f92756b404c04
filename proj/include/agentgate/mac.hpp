#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agentgate {

// HMAC-SHA256 over msg with the given key (OpenSSL-backed).
std::array<std::uint8_t, 32> hmac_sha256(std::span<const std::uint8_t> key,
                                         std::span<const std::uint8_t> msg);

std::string to_hex(std::span<const std::uint8_t> bytes);

// Throws std::invalid_argument on odd length or non-hex characters.
std::vector<std::uint8_t> from_hex(std::string_view hex);

// Constant-time comparison; false when lengths differ.
bool constant_time_equal(std::span<const std::uint8_t> a,
                         std::span<const std::uint8_t> b);

// CSPRNG bytes (OpenSSL RAND_bytes). Throws std::runtime_error on failure.
std::vector<std::uint8_t> random_bytes(std::size_t n);

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace agentgate
