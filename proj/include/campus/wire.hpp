#pragma once

// Tier protocol framing: a 4-byte big-endian length followed by that many
// bytes of UTF-8 JSON.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace campus::wire {

inline constexpr std::size_t kMaxFrame = 16u * 1024u * 1024u;

std::string encode_frame(std::string_view body);

/// Writes one frame; false when the peer has gone away.
bool write_frame(int fd, std::string_view body);

enum class ReadStatus { Ok, Closed, Error };

/// Reads one frame. Closed means a clean EOF before the first byte; a
/// truncated or oversized frame is an Error.
ReadStatus read_frame(int fd, std::string& out);

struct Endpoint {
    std::string host;
    int port = 0;

    static Endpoint parse(std::string_view text);  // "host:port"
    std::string str() const;
};

/// Blocking TCP connect; -1 on failure.
int connect_to(const Endpoint& ep);

}  // namespace campus::wire
