#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace campus::crypto {

/// Cryptographically secure random bytes.
std::vector<std::uint8_t> random_bytes(std::size_t n);

std::string hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view data);

/// 32 random bytes, hex encoded (256 bits of entropy).
std::string session_token();

/// Password of `length` characters drawn uniformly from [a-z0-9].
std::string generate_password(std::size_t length = 12);

/// ULID-style identifier: 48-bit millisecond timestamp + 80 random bits,
/// Crockford base32, 26 characters. Lexicographic order follows creation time.
std::string ulid(std::uint64_t unix_ms);

inline constexpr int kDefaultPbkdf2Iterations = 10000;

/// Salted PBKDF2-HMAC-SHA256, encoded "pbkdf2-sha256$<iterations>$<salt hex>$<hash hex>".
std::string hash_password(std::string_view password, int iterations = kDefaultPbkdf2Iterations);
bool verify_password(std::string_view password, std::string_view encoded);

/// Luhn checksum over a digit string (spaces and dashes ignored).
bool luhn_valid(std::string_view card_number);

}  // namespace campus::crypto
