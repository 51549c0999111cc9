#pragma once

#include "campus/wire.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <string>
#include <vector>

namespace campus {

/// Pooled connections from the web tier to the application tier. At most
/// `pool_size` connections exist; callers beyond that wait for one to free
/// up. Idle connections are probed before reuse so an application-tier
/// restart costs no failed request.
class AppClient {
  public:
    AppClient(wire::Endpoint endpoint, int pool_size);
    ~AppClient();
    AppClient(const AppClient&) = delete;
    AppClient& operator=(const AppClient&) = delete;

    /// Sends one framed request and returns the decoded response. Throws
    /// CampusError(AppTierUnavailable) on any transport failure.
    nlohmann::json call(const nlohmann::json& request);
    /// Same, returning the response text undecoded.
    std::string call_text(const std::string& request);

    std::string next_request_id();

  private:
    int checkout(bool& reused);
    void checkin(int fd, bool healthy);

    wire::Endpoint endpoint_;
    int pool_size_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::vector<int> idle_;
    int open_ = 0;
    std::atomic<std::uint64_t> counter_{0};
};

}  // namespace campus
