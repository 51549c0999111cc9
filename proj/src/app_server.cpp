#include "campus/app_server.hpp"

#include "campus/error.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace campus {

AppServer::AppServer(Dispatcher& dispatcher, AppServerOptions options)
    : dispatcher_(dispatcher), options_(std::move(options)) {}

AppServer::~AppServer() { stop(); }

void AppServer::start() {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    if (::getaddrinfo(options_.listen.host.c_str(), std::to_string(options_.listen.port).c_str(), &hints, &res) != 0 ||
        !res) {
        fail(ErrorCode::ValidationError, "cannot resolve listen address " + options_.listen.str());
    }
    int fd = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (fd < 0 || ::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 1024) != 0) {
        int err = errno;
        ::freeaddrinfo(res);
        if (fd >= 0) ::close(fd);
        if (err == EADDRINUSE) fail(ErrorCode::PortInUse, options_.listen.str() + " is already in use");
        fail(ErrorCode::StorageUnavailable, "cannot listen on " + options_.listen.str() + ": " + std::strerror(err));
    }
    ::freeaddrinfo(res);

    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                       : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    listen_fd_ = fd;
    started_ = true;

    for (int i = 0; i < std::max(1, options_.workers); ++i) workers_.emplace_back([this] { worker_loop(); });
    acceptor_ = std::thread([this] { accept_loop(); });
}

void AppServer::stop() {
    if (!started_ || stopping_.exchange(true)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    if (acceptor_.joinable()) acceptor_.join();
    ::close(listen_fd_);

    {
        std::lock_guard lock(conn_mu_);
        // Idle readers wake with EOF; a reader mid-request still gets to
        // write its reply because only the read side is shut.
        for (auto& c : connections_) {
            if (c.fd >= 0) ::shutdown(c.fd, SHUT_RD);
        }
    }
    for (auto& c : connections_) {
        if (c.thread.joinable()) c.thread.join();
    }
    connections_.clear();

    {
        std::lock_guard lock(queue_mu_);
        stopping_workers_ = true;
    }
    queue_cv_.notify_all();
    for (auto& w : workers_) w.join();
    workers_.clear();
}

void AppServer::reap_finished() {
    std::lock_guard lock(conn_mu_);
    for (auto it = connections_.begin(); it != connections_.end();) {
        if (it->finished) {
            it->thread.join();
            it = connections_.erase(it);
        } else {
            ++it;
        }
    }
}

void AppServer::accept_loop() {
    while (!stopping_) {
        int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) {
            if (errno == EINTR || errno == ECONNABORTED) continue;
            if (stopping_) break;
            if (errno == EMFILE || errno == ENFILE) {
                std::this_thread::sleep_for(std::chrono::milliseconds(10));
                continue;
            }
            break;
        }
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        reap_finished();
        std::lock_guard lock(conn_mu_);
        if (stopping_) {
            ::close(fd);
            break;
        }
        auto& conn = connections_.emplace_back();
        conn.fd = fd;
        conn.thread = std::thread([this, &conn] { serve_connection(conn); });
    }
}

void AppServer::serve_connection(Connection& conn) {
    std::string frame;
    while (wire::read_frame(conn.fd, frame) == wire::ReadStatus::Ok) {
        auto job = std::make_shared<Job>();
        job->frame = std::move(frame);
        auto reply = job->reply.get_future();
        bool busy = false;
        {
            std::lock_guard lock(queue_mu_);
            if (static_cast<int>(queue_.size()) >= options_.queue_bound) {
                busy = true;
            } else {
                queue_.push_back(job);
            }
        }
        std::string response;
        if (busy) {
            std::string request_id;
            try {
                request_id = nlohmann::json::parse(job->frame).value("request_id", "");
            } catch (const std::exception&) {
            }
            response = error_response(request_id, ErrorCode::ServerBusy, "request queue is full").dump();
        } else {
            queue_cv_.notify_one();
            response = reply.get();
        }
        if (!wire::write_frame(conn.fd, response)) break;
        frame.clear();
    }
    int fd;
    {
        std::lock_guard lock(conn_mu_);
        fd = conn.fd;
        conn.fd = -1;
    }
    ::close(fd);
    conn.finished = true;
}

void AppServer::worker_loop() {
    while (true) {
        std::shared_ptr<Job> job;
        {
            std::unique_lock lock(queue_mu_);
            queue_cv_.wait(lock, [this] { return stopping_workers_ || !queue_.empty(); });
            if (queue_.empty()) return;
            job = std::move(queue_.front());
            queue_.pop_front();
        }
        int now = ++in_flight_;
        int peak = peak_.load();
        while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
        }
        auto response = dispatcher_.dispatch_text(job->frame);
        --in_flight_;
        ++served_;
        job->reply.set_value(std::move(response));
    }
}

}  // namespace campus
