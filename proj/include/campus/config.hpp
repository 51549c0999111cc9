#pragma once

// Deployment configuration. The file format is a small TOML subset:
// `[section]` headers, `key = value` lines, `#` comments; values are quoted
// strings, integers or booleans. Keys are addressed as "section.key".

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace campus {

struct Config {
    std::string app_listen = "127.0.0.1:7001";
    int worker_pool_size = 8;
    int queue_bound = 1024;

    std::string web_listen = "127.0.0.1:7000";
    std::string web_app_server_addr = "127.0.0.1:7001";
    int web_pool_size = 16;
    int web_threads = 16;
    std::string web_static_dir;

    std::string data_dir = "data";
    int session_ttl_hours = 8;
    std::string letters_dir;
    std::string hr_url = "https://hr.example.invalid/";
    std::optional<std::string> clock_today;  // pins the calendar date, YYYY-MM-DD
    int pbkdf2_iterations = 10000;

    /// Reads `path` over the defaults. ValidationError names the offending
    /// line or key.
    static Config load(const std::filesystem::path& path);

    /// Sets one dotted key from its text form. Unknown keys are rejected.
    void set(std::string_view key, std::string_view value);
};

/// Raw key/value pairs of a config document, keyed "section.key".
std::map<std::string, std::string> parse_config_text(std::string_view text);

}  // namespace campus

#include "campus/context.hpp"

#include <memory>

namespace campus {

ServiceConfig service_config(const Config& config);
/// SystemClock, or an OffsetClock starting on `clock.today` when set.
std::unique_ptr<Clock> make_clock(const Config& config);

}  // namespace campus
