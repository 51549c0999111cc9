#include "campus/clock.hpp"

#include "campus/error.hpp"

#include <charconv>
#include <cstdio>
#include <optional>

namespace campus {

using namespace std::chrono;

OffsetClock::OffsetClock(TimePoint start_at) : offset_(start_at - system_clock::now()) {}

TimePoint OffsetClock::now() const { return system_clock::now() + offset_; }

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return ec == std::errc{} && p == s.data() + pos + len;
}

std::optional<year_month_day> read_ymd(std::string_view s) {
    int y = 0, m = 0, d = 0;
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (!read_int(s, 0, 4, y) || !read_int(s, 5, 2, m) || !read_int(s, 8, 2, d)) return std::nullopt;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return ymd;
}

}  // namespace

std::string format_timestamp(TimePoint t) {
    auto ms_total = time_point_cast<milliseconds>(t);
    auto days = floor<std::chrono::days>(ms_total);
    year_month_day ymd{days};
    hh_mm_ss hms{ms_total - days};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld.%03ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()), static_cast<long>(hms.subseconds().count()));
    return buf;
}

TimePoint parse_timestamp(std::string_view s) {
    auto ymd = read_ymd(s);
    int hh = 0, mm = 0, ss = 0, ms = 0;
    if (!ymd || s.size() < 24 || s[10] != 'T' || !read_int(s, 11, 2, hh) || !read_int(s, 14, 2, mm) ||
        !read_int(s, 17, 2, ss) || !read_int(s, 20, 3, ms)) {
        fail(ErrorCode::ValidationError, "invalid timestamp: '" + std::string(s) + "'");
    }
    return sys_days{*ymd} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{ms};
}

std::string format_date(TimePoint t) {
    year_month_day ymd{floor<days>(t)};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

bool valid_date(std::string_view s) { return s.size() == 10 && read_ymd(s).has_value(); }

TimePoint parse_date(std::string_view s) {
    if (!valid_date(s)) fail(ErrorCode::ValidationError, "invalid date: '" + std::string(s) + "'");
    return sys_days{*read_ymd(s)};
}

}  // namespace campus
