#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "railagent/clock.hpp"
#include "railagent/observation.hpp"
#include "railagent/slots.hpp"

namespace railagent {

struct Station {
  std::string station_id;
  std::string name;
  std::string city;
};

struct SeatClass {
  std::string name;
  int remaining = 0;
  double price = 0.0;  // CNY
};

struct TrainService {
  std::string train_no;
  std::string dep_station;  // station_id
  std::string arr_station;
  LocalTime dep_time;
  LocalTime arr_time;
  std::vector<SeatClass> seat_classes;
};

/// Departure window [start, end) in minutes after midnight.
struct TimeWindow {
  int start_minute = 0;
  int end_minute = 24 * 60;
  bool contains(int minute) const { return minute >= start_minute && minute < end_minute; }
  std::string describe() const;
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// "morning" 06-12, "afternoon" 12-18, "evening"/"night" 18-24, "HH:MM-HH:MM".
/// Empty or "any" means no window. Throws std::invalid_argument otherwise.
std::optional<TimeWindow> parse_time_window(std::string_view expr);

struct TicketQuery {
  std::string from;
  std::string to;
  Days date;
  std::optional<TimeWindow> time_window;
};

class TimetableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StationResolution {
  enum class Kind { Exact, CityGroup, NotFound };
  Kind kind = Kind::NotFound;
  std::vector<const Station*> stations;  // one for Exact, the whole city for CityGroup
  std::string city;
};

/// Immutable timetable index. Station names are matched after
/// normalization, with a trailing "station" dropped.
class ScheduleStore {
 public:
  ScheduleStore(std::vector<Station> stations, std::vector<TrainService> services);

  static ScheduleStore load(const std::filesystem::path& path);

  const std::vector<Station>& stations() const { return stations_; }
  const std::vector<TrainService>& services() const { return services_; }
  const Station* station_by_id(std::string_view id) const;
  std::vector<const Station*> stations_in_city(std::string_view city) const;
  std::vector<std::string> cities() const;

  StationResolution resolve_station(std::string_view name) const;

  /// Services between two stations departing on `date` (and inside the window
  /// when given), ordered by departure time then train number.
  std::vector<const TrainService*> services_between(std::string_view dep_id, std::string_view arr_id,
                                                    Days date,
                                                    const std::optional<TimeWindow>& window) const;

 private:
  std::vector<Station> stations_;
  std::vector<TrainService> services_;
  std::map<std::string, size_t, std::less<>> by_id_;
  std::map<std::string, size_t, std::less<>> by_name_;
  std::map<std::string, std::vector<size_t>, std::less<>> by_city_;
};

std::string normalize_station_name(std::string_view name);

inline constexpr size_t kTopTickets = 3;
inline constexpr std::string_view kBareNoTrains = "no matching trains found";

ObservationResult query_tickets(const TicketQuery& q, const ScheduleStore& store, bool error_info);

/// Tool adapter: turns from/to/date/time slots into a query (relative dates
/// resolved against the injected clock) and runs it.
ObservationResult ticketing_from_slots(const SlotMap& slots, const ScheduleStore& store,
                                       const Clock& clock, bool error_info);

}  // namespace railagent
