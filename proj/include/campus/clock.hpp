#pragma once

#include <atomic>
#include <chrono>
#include <string>
#include <string_view>

namespace campus {

using TimePoint = std::chrono::system_clock::time_point;

class Clock {
  public:
    virtual ~Clock() = default;
    virtual TimePoint now() const = 0;
};

class SystemClock final : public Clock {
  public:
    TimePoint now() const override { return std::chrono::system_clock::now(); }
};

/// Real time shifted so that the process starts on a chosen calendar date.
/// Deployments pin the academic calendar this way while sessions still age.
class OffsetClock final : public Clock {
  public:
    explicit OffsetClock(TimePoint start_at);
    TimePoint now() const override;

  private:
    std::chrono::system_clock::duration offset_;
};

class ManualClock final : public Clock {
  public:
    explicit ManualClock(TimePoint t) : now_(t.time_since_epoch().count()) {}
    TimePoint now() const override { return TimePoint(TimePoint::duration(now_.load())); }
    void set(TimePoint t) { now_.store(t.time_since_epoch().count()); }
    void advance(std::chrono::system_clock::duration d) { now_.fetch_add(d.count()); }

  private:
    std::atomic<TimePoint::rep> now_;
};

/// "2011-02-14T09:30:00.000Z"
std::string format_timestamp(TimePoint t);
TimePoint parse_timestamp(std::string_view s);
/// "2011-02-14"
std::string format_date(TimePoint t);
/// Midnight UTC of a YYYY-MM-DD date; throws ValidationError when malformed.
TimePoint parse_date(std::string_view s);
bool valid_date(std::string_view s);

}  // namespace campus
