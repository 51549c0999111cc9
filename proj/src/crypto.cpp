#include "campus/crypto.hpp"

#include "campus/error.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <charconv>
#include <optional>
#include <vector>

namespace campus::crypto {

std::vector<std::uint8_t> random_bytes(std::size_t n) {
    std::vector<std::uint8_t> out(n);
    if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1) {
        fail(ErrorCode::InternalError, "random source unavailable");
    }
    return out;
}

std::string hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xf]);
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    std::uint8_t digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        fail(ErrorCode::InternalError, "sha256 failed");
    }
    return hex({digest, len});
}

std::string session_token() { return hex(random_bytes(32)); }

std::string generate_password(std::size_t length) {
    static constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::string out;
    out.reserve(length);
    // Rejection sampling keeps the draw uniform: 252 = 7 * 36.
    while (out.size() < length) {
        for (auto b : random_bytes(length * 2)) {
            if (b >= 252) continue;
            out.push_back(kAlphabet[b % kAlphabet.size()]);
            if (out.size() == length) break;
        }
    }
    return out;
}

std::string ulid(std::uint64_t unix_ms) {
    static constexpr char kCrockford[] = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";
    auto rnd = random_bytes(10);
    // 128 bits: 48 timestamp bits then 80 random bits, emitted as 26 base32
    // digits (the first digit carries only 3 bits).
    unsigned __int128 value = static_cast<unsigned __int128>(unix_ms & 0xFFFFFFFFFFFFull) << 80;
    for (int i = 0; i < 10; ++i) value |= static_cast<unsigned __int128>(rnd[i]) << (8 * (9 - i));
    std::string out(26, '0');
    for (int i = 25; i >= 0; --i) {
        out[i] = kCrockford[static_cast<unsigned>(value & 0x1f)];
        value >>= 5;
    }
    return out;
}

namespace {

std::vector<std::uint8_t> pbkdf2(std::string_view password, std::span<const std::uint8_t> salt, int iterations) {
    std::vector<std::uint8_t> out(32);
    if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()), salt.data(),
                          static_cast<int>(salt.size()), iterations, EVP_sha256(), static_cast<int>(out.size()),
                          out.data()) != 1) {
        fail(ErrorCode::InternalError, "password hashing failed");
    }
    return out;
}

std::optional<std::vector<std::uint8_t>> unhex(std::string_view s) {
    if (s.size() % 2 != 0) return std::nullopt;
    std::vector<std::uint8_t> out(s.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        unsigned v = 0;
        auto [p, ec] = std::from_chars(s.data() + 2 * i, s.data() + 2 * i + 2, v, 16);
        if (ec != std::errc{} || p != s.data() + 2 * i + 2) return std::nullopt;
        out[i] = static_cast<std::uint8_t>(v);
    }
    return out;
}

}  // namespace

std::string hash_password(std::string_view password, int iterations) {
    auto salt = random_bytes(16);
    auto digest = pbkdf2(password, salt, iterations);
    return "pbkdf2-sha256$" + std::to_string(iterations) + "$" + hex(salt) + "$" + hex(digest);
}

bool verify_password(std::string_view password, std::string_view encoded) {
    constexpr std::string_view kPrefix = "pbkdf2-sha256$";
    if (!encoded.starts_with(kPrefix)) return false;
    auto rest = encoded.substr(kPrefix.size());
    auto d1 = rest.find('$');
    if (d1 == std::string_view::npos) return false;
    auto d2 = rest.find('$', d1 + 1);
    if (d2 == std::string_view::npos) return false;
    int iterations = 0;
    auto it = rest.substr(0, d1);
    auto [p, ec] = std::from_chars(it.data(), it.data() + it.size(), iterations);
    if (ec != std::errc{} || iterations <= 0) return false;
    auto salt = unhex(rest.substr(d1 + 1, d2 - d1 - 1));
    auto expected = unhex(rest.substr(d2 + 1));
    if (!salt || !expected || expected->size() != 32) return false;
    auto actual = pbkdf2(password, *salt, iterations);
    return CRYPTO_memcmp(actual.data(), expected->data(), actual.size()) == 0;
}

bool luhn_valid(std::string_view card_number) {
    std::vector<int> digits;
    for (char c : card_number) {
        if (c == ' ' || c == '-') continue;
        if (c < '0' || c > '9') return false;
        digits.push_back(c - '0');
    }
    if (digits.size() < 12 || digits.size() > 19) return false;
    int sum = 0;
    bool dbl = false;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        int d = *it;
        if (dbl) {
            d *= 2;
            if (d > 9) d -= 9;
        }
        sum += d;
        dbl = !dbl;
    }
    return sum % 10 == 0;
}

}  // namespace campus::crypto
