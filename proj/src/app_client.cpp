#include "campus/app_client.hpp"

#include "campus/error.hpp"

#include <poll.h>
#include <unistd.h>

namespace campus {

namespace {

// An idle pooled socket that is readable has either been closed by the peer
// or holds stray bytes; neither is safe to reuse.
bool stale(int fd) {
    pollfd p{fd, POLLIN, 0};
    return ::poll(&p, 1, 0) != 0;
}

}  // namespace

AppClient::AppClient(wire::Endpoint endpoint, int pool_size)
    : endpoint_(std::move(endpoint)), pool_size_(std::max(1, pool_size)) {}

AppClient::~AppClient() {
    for (int fd : idle_) ::close(fd);
}

std::string AppClient::next_request_id() {
    return "web-" + std::to_string(::getpid()) + "-" + std::to_string(++counter_);
}

int AppClient::checkout(bool& reused) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return !idle_.empty() || open_ < pool_size_; });
    while (!idle_.empty()) {
        int fd = idle_.back();
        idle_.pop_back();
        if (!stale(fd)) {
            reused = true;
            return fd;
        }
        ::close(fd);
        --open_;
    }
    ++open_;
    lock.unlock();
    reused = false;
    int fd = wire::connect_to(endpoint_);
    if (fd < 0) {
        lock.lock();
        --open_;
        cv_.notify_one();
        fail(ErrorCode::AppTierUnavailable, "application tier unreachable at " + endpoint_.str());
    }
    return fd;
}

void AppClient::checkin(int fd, bool healthy) {
    {
        std::lock_guard lock(mu_);
        if (healthy) {
            idle_.push_back(fd);
        } else {
            ::close(fd);
            --open_;
        }
    }
    cv_.notify_one();
}

std::string AppClient::call_text(const std::string& request) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        bool reused = false;
        int fd = checkout(reused);
        std::string reply;
        bool sent = wire::write_frame(fd, request);
        auto status = sent ? wire::read_frame(fd, reply) : wire::ReadStatus::Error;
        if (status == wire::ReadStatus::Ok) {
            checkin(fd, true);
            return reply;
        }
        checkin(fd, false);
        // A reused connection that the server closed between our probe and
        // the write: the request never reached a worker, so one retry on a
        // fresh connection is safe.
        if (!(reused && (!sent || status == wire::ReadStatus::Closed))) break;
    }
    fail(ErrorCode::AppTierUnavailable, "application tier connection failed");
}

nlohmann::json AppClient::call(const nlohmann::json& request) {
    auto text = call_text(request.dump());
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception&) {
        fail(ErrorCode::AppTierUnavailable, "application tier sent an undecodable response");
    }
}

}  // namespace campus
