#pragma once

#include "campus/app_client.hpp"
#include "campus/wire.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace campus {

enum class BodyMode {
    Json,        // JSON object merged into the payload
    Fields,      // JSON object placed under payload.fields
    RawContent,  // raw request body placed under payload.content
};

/// One HTTP route bound to one application-tier operation. `{name}` path
/// segments become payload fields of the same name; query parameters are
/// copied into the payload as text.
struct RouteBinding {
    std::string_view method;
    std::string_view path;
    std::string_view operation;
    int success_status = 200;
    BodyMode body = BodyMode::Json;
    bool csv_response = false;  // respond with payload.csv as text/csv
};

const std::vector<RouteBinding>& route_table();

/// HTTP status for a catalog error code name.
int http_status_for(std::string_view error_code);

struct WebOptions {
    wire::Endpoint listen{"127.0.0.1", 7000};
    int threads = 16;
    std::string static_dir;
};

/// Stateless HTTP front: translates routes to wire messages and relays the
/// responses. Holds no session or business state.
class WebServer {
  public:
    WebServer(AppClient& client, WebOptions options);
    ~WebServer();
    WebServer(const WebServer&) = delete;
    WebServer& operator=(const WebServer&) = delete;

    /// Binds and serves on a background thread. Throws PortInUse.
    void start();
    void stop();
    int port() const { return port_; }

  private:
    void install_routes();

    AppClient& client_;
    WebOptions options_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace campus
