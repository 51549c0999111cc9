#include "campus/wire.hpp"

#include "campus/error.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace campus::wire {

namespace {

bool write_all(int fd, const char* data, std::size_t n) {
    while (n > 0) {
        auto w = ::send(fd, data, n, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data += w;
        n -= static_cast<std::size_t>(w);
    }
    return true;
}

// Returns bytes read; short only on EOF or error.
std::size_t read_all(int fd, char* data, std::size_t n, bool& error) {
    std::size_t got = 0;
    while (got < n) {
        auto r = ::recv(fd, data + got, n - got, 0);
        if (r < 0) {
            if (errno == EINTR) continue;
            error = true;
            return got;
        }
        if (r == 0) return got;
        got += static_cast<std::size_t>(r);
    }
    return got;
}

}  // namespace

std::string encode_frame(std::string_view body) {
    std::string out;
    out.reserve(body.size() + 4);
    auto n = static_cast<std::uint32_t>(body.size());
    out.push_back(static_cast<char>((n >> 24) & 0xff));
    out.push_back(static_cast<char>((n >> 16) & 0xff));
    out.push_back(static_cast<char>((n >> 8) & 0xff));
    out.push_back(static_cast<char>(n & 0xff));
    out.append(body);
    return out;
}

bool write_frame(int fd, std::string_view body) {
    if (body.size() > kMaxFrame) return false;
    auto frame = encode_frame(body);
    return write_all(fd, frame.data(), frame.size());
}

ReadStatus read_frame(int fd, std::string& out) {
    unsigned char hdr[4];
    bool error = false;
    auto got = read_all(fd, reinterpret_cast<char*>(hdr), 4, error);
    if (got == 0 && !error) return ReadStatus::Closed;
    if (got < 4) return ReadStatus::Error;
    std::uint32_t n = (std::uint32_t{hdr[0]} << 24) | (std::uint32_t{hdr[1]} << 16) | (std::uint32_t{hdr[2]} << 8) |
                      std::uint32_t{hdr[3]};
    if (n > kMaxFrame) return ReadStatus::Error;
    out.resize(n);
    if (read_all(fd, out.data(), n, error) < n) return ReadStatus::Error;
    return ReadStatus::Ok;
}

Endpoint Endpoint::parse(std::string_view text) {
    auto colon = text.rfind(':');
    Endpoint ep;
    if (colon == std::string_view::npos) fail(ErrorCode::ValidationError, "address must be host:port: " + std::string(text));
    ep.host = std::string(text.substr(0, colon));
    auto port = text.substr(colon + 1);
    auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), ep.port);
    if (ec != std::errc() || p != port.data() + port.size() || ep.port < 0 || ep.port > 65535 || ep.host.empty()) {
        fail(ErrorCode::ValidationError, "address must be host:port: " + std::string(text));
    }
    return ep;
}

std::string Endpoint::str() const { return host + ":" + std::to_string(port); }

int connect_to(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &res) != 0) return -1;
    int fd = -1;
    for (auto* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd >= 0) {
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }
    return fd;
}

}  // namespace campus::wire
