#pragma once

#include "campus/dispatcher.hpp"
#include "campus/wire.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <future>
#include <list>
#include <mutex>
#include <thread>
#include <vector>

namespace campus {

struct AppServerOptions {
    wire::Endpoint listen{"127.0.0.1", 7001};
    int workers = 8;
    int queue_bound = 1024;
};

/// TCP front of the application tier. One reader thread per connection
/// feeds a bounded queue drained by a fixed worker pool, so at most
/// `workers` requests execute at once. Requests beyond `queue_bound` waiting
/// are answered ServerBusy.
class AppServer {
  public:
    AppServer(Dispatcher& dispatcher, AppServerOptions options);
    ~AppServer();
    AppServer(const AppServer&) = delete;
    AppServer& operator=(const AppServer&) = delete;

    /// Binds and starts serving. Throws PortInUse when the address is taken.
    void start();
    /// Stops accepting, lets in-flight requests finish, then returns.
    void stop();

    int port() const { return port_; }
    int peak_in_flight() const { return peak_.load(); }
    std::uint64_t served() const { return served_.load(); }

  private:
    struct Job {
        std::string frame;
        std::promise<std::string> reply;
    };
    struct Connection {
        int fd = -1;
        std::thread thread;
        std::atomic<bool> finished{false};
    };

    void accept_loop();
    void serve_connection(Connection& conn);
    void worker_loop();
    void reap_finished();

    Dispatcher& dispatcher_;
    AppServerOptions options_;
    int listen_fd_ = -1;
    int port_ = 0;

    std::thread acceptor_;
    std::vector<std::thread> workers_;

    std::mutex conn_mu_;
    std::list<Connection> connections_;

    std::mutex queue_mu_;
    std::condition_variable queue_cv_;
    std::deque<std::shared_ptr<Job>> queue_;
    bool stopping_workers_ = false;

    std::atomic<bool> stopping_{false};
    std::atomic<bool> started_{false};
    std::atomic<int> in_flight_{0};
    std::atomic<int> peak_{0};
    std::atomic<std::uint64_t> served_{0};
};

}  // namespace campus
