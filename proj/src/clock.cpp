#include "railagent/clock.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <mutex>

#include "railagent/text.hpp"

namespace railagent {

namespace {

std::mutex g_source_mutex;
TimeSource g_source;

LocalTime system_now() {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

LocalTime SystemClock::now() const {
  std::lock_guard lock(g_source_mutex);
  return g_source ? g_source() : system_now();
}

void set_ambient_time_source(TimeSource src) {
  std::lock_guard lock(g_source_mutex);
  g_source = std::move(src);
}

void reset_ambient_time_source() { set_ambient_time_source(nullptr); }

std::optional<Days> parse_date(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  int y, m, d;
  if (!parse_int(iso.substr(0, 4), y) || !parse_int(iso.substr(5, 2), m) ||
      !parse_int(iso.substr(8, 2), d))
    return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                  std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Days{ymd};
}

std::optional<LocalTime> parse_datetime(std::string_view iso) {
  if (iso.size() < 16 || (iso[10] != 'T' && iso[10] != ' ')) return std::nullopt;
  auto day = parse_date(iso.substr(0, 10));
  auto hm = parse_hhmm(iso.substr(11, 5));
  if (!day || !hm || *hm >= 24 * 60) return std::nullopt;
  int sec = 0;
  if (iso.size() == 19) {
    if (iso[16] != ':' || !parse_int(iso.substr(17, 2), sec) || sec > 59) return std::nullopt;
  } else if (iso.size() != 16) {
    return std::nullopt;
  }
  return LocalTime{*day} + std::chrono::minutes{*hm} + std::chrono::seconds{sec};
}

std::string format_date(Days d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return buf;
}

std::string format_hhmm(int minute_of_day) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minute_of_day / 60, minute_of_day % 60);
  return buf;
}

std::string format_datetime(LocalTime t) {
  auto day = std::chrono::floor<std::chrono::days>(t);
  return format_date(day) + "T" + format_hhmm(minute_of_day(t));
}

std::optional<int> parse_hhmm(std::string_view s) {
  auto colon = s.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  int h, m;
  if (!parse_int(s.substr(0, colon), h) || !parse_int(s.substr(colon + 1), m)) return std::nullopt;
  if (h < 0 || m < 0 || m > 59 || h > 24 || (h == 24 && m != 0)) return std::nullopt;
  return h * 60 + m;
}

int minute_of_day(LocalTime t) {
  auto since = t - std::chrono::floor<std::chrono::days>(t);
  return static_cast<int>(std::chrono::duration_cast<std::chrono::minutes>(since).count());
}

std::optional<Days> resolve_date_expression(std::string_view expr, Days today) {
  auto norm = normalize_name(expr);
  if (norm == "today") return today;
  if (norm == "tomorrow") return today + std::chrono::days{1};
  if (norm == "day after tomorrow" || norm == "the day after tomorrow")
    return today + std::chrono::days{2};

  static constexpr std::array<std::string_view, 7> kWeekdays = {
      "sunday", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday"};
  for (unsigned i = 0; i < kWeekdays.size(); ++i) {
    if (norm == kWeekdays[i]) {
      std::chrono::weekday current{today};
      auto delta = (std::chrono::weekday{i} - current).count();
      if (delta == 0) delta = 7;
      return today + std::chrono::days{delta};
    }
  }
  return parse_date(trim(expr));
}

}  // namespace railagent
