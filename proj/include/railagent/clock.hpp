#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace railagent {

using Days = std::chrono::sys_days;
/// Naive local wall-clock time. Timetables and clocks are all expressed in
/// the same (station-local) zone, so no zone conversion ever happens.
using LocalTime = std::chrono::sys_seconds;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual LocalTime now() const = 0;
  Days today() const { return std::chrono::floor<std::chrono::days>(now()); }
};

class FixedClock final : public Clock {
 public:
  explicit FixedClock(LocalTime t) : t_(t) {}
  LocalTime now() const override { return t_; }

 private:
  LocalTime t_;
};

/// Reads the process time source. This is the only place in the library that
/// touches ambient time; tests replace the source to prove nothing else does.
class SystemClock final : public Clock {
 public:
  LocalTime now() const override;
};

using TimeSource = std::function<LocalTime()>;
void set_ambient_time_source(TimeSource src);
void reset_ambient_time_source();

std::optional<Days> parse_date(std::string_view iso);
std::optional<LocalTime> parse_datetime(std::string_view iso);
std::string format_date(Days d);
std::string format_datetime(LocalTime t);
std::string format_hhmm(int minute_of_day);
/// "HH:MM" -> minutes since midnight; "24:00" accepted as 1440.
std::optional<int> parse_hhmm(std::string_view s);
int minute_of_day(LocalTime t);

/// Resolves "today", "tomorrow", "day after tomorrow", weekday names (the
/// next such day strictly after today) and ISO dates. Anything else is
/// unresolvable.
std::optional<Days> resolve_date_expression(std::string_view expr, Days today);

}  // namespace railagent
