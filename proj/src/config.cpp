#include "campus/config.hpp"

#include "campus/clock.hpp"
#include "campus/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace campus {

namespace {

std::string_view trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int to_int(std::string_view key, std::string_view v) {
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        fail(ErrorCode::ValidationError, "config " + std::string(key) + " must be an integer", {{"key", key}});
    }
    return out;
}

int positive(std::string_view key, std::string_view v) {
    int n = to_int(key, v);
    if (n <= 0) fail(ErrorCode::ValidationError, "config " + std::string(key) + " must be positive", {{"key", key}});
    return n;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(std::string_view text) {
    std::map<std::string, std::string> out;
    std::string section;
    int lineno = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        auto line = trim(raw);
        auto bad = [&](const std::string& why) {
            fail(ErrorCode::ValidationError, "config line " + std::to_string(lineno) + ": " + why, {{"line", lineno}});
        };
        if (line.empty() || line[0] == '#') continue;
        if (line[0] == '[') {
            if (line.back() != ']') bad("unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) bad("expected key = value");
        auto key = std::string(trim(line.substr(0, eq)));
        auto value = trim(line.substr(eq + 1));
        std::string parsed;
        if (!value.empty() && value[0] == '"') {
            auto close = value.find('"', 1);
            if (close == std::string_view::npos) bad("unterminated string");
            auto rest = trim(value.substr(close + 1));
            if (!rest.empty() && rest[0] != '#') bad("unexpected text after string");
            parsed = std::string(value.substr(1, close - 1));
        } else {
            auto hash = value.find('#');
            parsed = std::string(trim(value.substr(0, hash)));
            if (parsed.empty()) bad("missing value");
        }
        if (key.empty()) bad("missing key");
        out[section.empty() ? key : section + "." + key] = parsed;
    }
    return out;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::ValidationError, "cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    Config c;
    for (const auto& [k, v] : parse_config_text(ss.str())) c.set(k, v);
    return c;
}

void Config::set(std::string_view key, std::string_view value) {
    if (key == "app_server.listen") app_listen = value;
    else if (key == "app_server.worker_pool_size") worker_pool_size = positive(key, value);
    else if (key == "app_server.queue_bound") queue_bound = positive(key, value);
    else if (key == "web.listen") web_listen = value;
    else if (key == "web.app_server_addr") web_app_server_addr = value;
    else if (key == "web.pool_size") web_pool_size = positive(key, value);
    else if (key == "web.threads") web_threads = positive(key, value);
    else if (key == "web.static_dir") web_static_dir = value;
    else if (key == "data.dir") data_dir = value;
    else if (key == "session.ttl_hours") session_ttl_hours = positive(key, value);
    else if (key == "letters.dir") letters_dir = value;
    else if (key == "links.hr_url") hr_url = value;
    else if (key == "clock.today") {
        if (value.empty()) {
            clock_today.reset();
        } else {
            if (!valid_date(value)) fail(ErrorCode::ValidationError, "clock.today must be YYYY-MM-DD", {{"key", key}});
            clock_today = std::string(value);
        }
    } else if (key == "security.pbkdf2_iterations") pbkdf2_iterations = positive(key, value);
    else fail(ErrorCode::ValidationError, "unknown config key " + std::string(key), {{"key", key}});
}

}  // namespace campus

namespace campus {

ServiceConfig service_config(const Config& config) {
    ServiceConfig s;
    s.session_ttl = std::chrono::hours(config.session_ttl_hours);
    s.pbkdf2_iterations = config.pbkdf2_iterations;
    s.hr_url = config.hr_url;
    s.letters = config.letters_dir.empty() ? LetterTemplates::defaults() : LetterTemplates::load(config.letters_dir);
    return s;
}

std::unique_ptr<Clock> make_clock(const Config& config) {
    if (!config.clock_today) return std::make_unique<SystemClock>();
    auto now = std::chrono::system_clock::now();
    auto time_of_day = now - std::chrono::floor<std::chrono::days>(now);
    return std::make_unique<OffsetClock>(parse_date(*config.clock_today) + time_of_day);
}

}  // namespace campus
