#include "railagent/ticketing.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "railagent/text.hpp"

namespace railagent {

using nlohmann::ordered_json;

std::string TimeWindow::describe() const {
  return format_hhmm(start_minute) + "-" + format_hhmm(end_minute);
}

std::optional<TimeWindow> parse_time_window(std::string_view expr) {
  auto norm = normalize_name(expr);
  if (norm.empty() || norm == "any" || norm == "any time" || norm == "anytime" || norm == "all day")
    return std::nullopt;
  if (norm == "morning") return TimeWindow{6 * 60, 12 * 60};
  if (norm == "afternoon") return TimeWindow{12 * 60, 18 * 60};
  if (norm == "evening" || norm == "night" || norm == "tonight") return TimeWindow{18 * 60, 24 * 60};
  auto text = trim(expr);
  auto dash = text.find('-');
  if (dash != std::string::npos) {
    auto a = parse_hhmm(trim(std::string_view(text).substr(0, dash)));
    auto b = parse_hhmm(trim(std::string_view(text).substr(dash + 1)));
    if (a && b && *a < *b) return TimeWindow{*a, *b};
  }
  throw std::invalid_argument("unrecognized time window \"" + text + "\"");
}

std::string normalize_station_name(std::string_view name) {
  auto toks = tokens(name);
  while (!toks.empty() && (toks.back() == "station" || toks.back() == "railway")) toks.pop_back();
  std::string out;
  for (const auto& t : toks) out += (out.empty() ? "" : " ") + t;
  return out;
}

ScheduleStore::ScheduleStore(std::vector<Station> stations, std::vector<TrainService> services)
    : stations_(std::move(stations)), services_(std::move(services)) {
  for (size_t i = 0; i < stations_.size(); ++i) {
    const auto& s = stations_[i];
    if (s.station_id.empty() || s.name.empty() || s.city.empty())
      throw TimetableError("station record needs id, name and city");
    if (!by_id_.emplace(s.station_id, i).second)
      throw TimetableError("duplicate station id " + s.station_id);
    if (!by_name_.emplace(normalize_station_name(s.name), i).second)
      throw TimetableError("duplicate station name " + s.name);
    by_city_[normalize_name(s.city)].push_back(i);
  }
  for (auto& [city, idx] : by_city_)
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return stations_[a].name < stations_[b].name; });
  for (const auto& t : services_) {
    if (!by_id_.count(t.dep_station) || !by_id_.count(t.arr_station))
      throw TimetableError("train " + t.train_no + " references an unknown station");
    if (t.arr_time <= t.dep_time) throw TimetableError("train " + t.train_no + " arrives before it departs");
    for (const auto& c : t.seat_classes)
      if (c.remaining < 0) throw TimetableError("train " + t.train_no + " has negative seat count");
  }
}

ScheduleStore ScheduleStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TimetableError("cannot open timetable " + path.string());
  std::vector<Station> stations;
  std::vector<TrainService> services;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto where = path.string() + ":" + std::to_string(lineno) + ": ";
    try {
      auto j = ordered_json::parse(t);
      auto kind = j.at("kind").get<std::string>();
      if (kind == "station") {
        stations.push_back({j.at("station_id").get<std::string>(), j.at("name").get<std::string>(),
                            j.at("city").get<std::string>()});
      } else if (kind == "service") {
        TrainService s;
        s.train_no = j.at("train_no").get<std::string>();
        s.dep_station = j.at("dep").get<std::string>();
        s.arr_station = j.at("arr").get<std::string>();
        auto dep = parse_datetime(j.at("dep_time").get<std::string>());
        auto arr = parse_datetime(j.at("arr_time").get<std::string>());
        if (!dep || !arr) throw TimetableError("bad date-time");
        s.dep_time = *dep;
        s.arr_time = *arr;
        for (const auto& c : j.value("seats", ordered_json::array()))
          s.seat_classes.push_back({c.at("class").get<std::string>(), c.at("remaining").get<int>(),
                                    c.at("price").get<double>()});
        services.push_back(std::move(s));
      } else {
        throw TimetableError("unknown record kind \"" + kind + "\"");
      }
    } catch (const nlohmann::json::exception& e) {
      throw TimetableError(where + e.what());
    } catch (const TimetableError& e) {
      throw TimetableError(where + e.what());
    }
  }
  return ScheduleStore(std::move(stations), std::move(services));
}

const Station* ScheduleStore::station_by_id(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &stations_[it->second];
}

std::vector<const Station*> ScheduleStore::stations_in_city(std::string_view city) const {
  std::vector<const Station*> out;
  auto it = by_city_.find(normalize_name(city));
  if (it != by_city_.end())
    for (size_t i : it->second) out.push_back(&stations_[i]);
  return out;
}

std::vector<std::string> ScheduleStore::cities() const {
  std::set<std::string> names;
  for (const auto& s : stations_) names.insert(s.city);
  return {names.begin(), names.end()};
}

StationResolution ScheduleStore::resolve_station(std::string_view name) const {
  StationResolution r;
  auto norm = normalize_station_name(name);
  if (norm.empty()) return r;
  if (auto it = by_name_.find(norm); it != by_name_.end()) {
    r.kind = StationResolution::Kind::Exact;
    r.stations = {&stations_[it->second]};
    r.city = stations_[it->second].city;
    return r;
  }
  // longest leading token run that names a city
  auto toks = split(norm, ' ');
  for (size_t n = toks.size(); n > 0; --n) {
    std::string prefix;
    for (size_t i = 0; i < n; ++i) prefix += (i ? " " : "") + toks[i];
    auto group = stations_in_city(prefix);
    if (!group.empty()) {
      r.kind = StationResolution::Kind::CityGroup;
      r.stations = std::move(group);
      r.city = r.stations.front()->city;
      return r;
    }
  }
  return r;
}

std::vector<const TrainService*> ScheduleStore::services_between(
    std::string_view dep_id, std::string_view arr_id, Days date,
    const std::optional<TimeWindow>& window) const {
  std::vector<const TrainService*> out;
  for (const auto& s : services_) {
    if (s.dep_station != dep_id || s.arr_station != arr_id) continue;
    if (std::chrono::floor<std::chrono::days>(s.dep_time) != date) continue;
    if (window && !window->contains(minute_of_day(s.dep_time))) continue;
    out.push_back(&s);
  }
  std::sort(out.begin(), out.end(), [](const TrainService* a, const TrainService* b) {
    if (a->dep_time != b->dep_time) return a->dep_time < b->dep_time;
    return a->train_no < b->train_no;
  });
  return out;
}

namespace {

std::string money(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string when(const TicketQuery& q) {
  auto s = "on " + format_date(q.date);
  if (q.time_window) s += " departing " + q.time_window->describe();
  return s;
}

ordered_json query_payload(const TicketQuery& q) {
  ordered_json j;
  j["from"] = q.from;
  j["to"] = q.to;
  j["date"] = format_date(q.date);
  j["window"] = q.time_window ? ordered_json(q.time_window->describe()) : ordered_json(nullptr);
  return j;
}

ObservationResult fail(bool error_info, const char* code, std::string detail, ordered_json payload) {
  payload["error"] = code;
  if (!error_info) return ObservationResult::error(code, std::string(kBareNoTrains), std::move(payload));
  return ObservationResult::error(code, "Error: " + detail, std::move(payload));
}

ObservationResult success(const TicketQuery& q, const ScheduleStore& store, const Station& dep,
                          const Station& arr, const std::vector<const TrainService*>& found) {
  auto payload = query_payload(q);
  payload["from_station"] = dep.name;
  payload["to_station"] = arr.name;
  auto trains = ordered_json::array();
  size_t shown = std::min(kTopTickets, found.size());
  std::string text = "Found " + std::to_string(found.size()) + " train(s) from " + dep.name + " to " +
                     arr.name + " " + when(q) + "; top " + std::to_string(shown) + ":";
  for (size_t i = 0; i < shown; ++i) {
    const auto& t = *found[i];
    text += "\n" + std::to_string(i + 1) + ". " + t.train_no + " " + format_hhmm(minute_of_day(t.dep_time)) +
            " -> " + format_hhmm(minute_of_day(t.arr_time));
    ordered_json jt;
    jt["train_no"] = t.train_no;
    jt["dep_station"] = store.station_by_id(t.dep_station)->name;
    jt["arr_station"] = store.station_by_id(t.arr_station)->name;
    jt["dep_time"] = format_datetime(t.dep_time);
    jt["arr_time"] = format_datetime(t.arr_time);
    auto seats = ordered_json::array();
    for (const auto& c : t.seat_classes) {
      text += " | " + c.name + ": " + std::to_string(c.remaining) + " left, CNY " + money(c.price);
      seats.push_back({{"class", c.name}, {"remaining", c.remaining}, {"price", c.price}});
    }
    jt["seats"] = std::move(seats);
    trains.push_back(std::move(jt));
  }
  payload["trains"] = std::move(trains);
  return ObservationResult::success(std::move(text), std::move(payload));
}

}  // namespace

ObservationResult query_tickets(const TicketQuery& q, const ScheduleStore& store, bool error_info) {
  auto rf = store.resolve_station(q.from);
  auto rt = store.resolve_station(q.to);
  for (const auto* r : {&rf, &rt}) {
    if (r->kind != StationResolution::Kind::NotFound) continue;
    const auto& name = r == &rf ? q.from : q.to;
    auto payload = query_payload(q);
    payload["station"] = name;
    std::string known;
    for (const auto& c : store.cities()) known += (known.empty() ? "" : ", ") + c;
    return fail(error_info, errc::kStationNotFound,
                "station not found: \"" + name + "\" does not match any known station or city. "
                "Known cities: " + known + ".",
                std::move(payload));
  }

  using Kind = StationResolution::Kind;
  if (rf.kind == Kind::Exact && rt.kind == Kind::Exact) {
    auto found = store.services_between(rf.stations[0]->station_id, rt.stations[0]->station_id, q.date,
                                        q.time_window);
    if (!found.empty()) return success(q, store, *rf.stations[0], *rt.stations[0], found);
  }

  // nearest alternative: the same-city station pair with the most services
  auto from_group = rf.kind == Kind::Exact ? store.stations_in_city(rf.city) : rf.stations;
  auto to_group = rt.kind == Kind::Exact ? store.stations_in_city(rt.city) : rt.stations;
  const Station* best_from = nullptr;
  const Station* best_to = nullptr;
  size_t best_count = 0;
  size_t day_count = 0;
  for (const auto* a : from_group) {
    for (const auto* b : to_group) {
      day_count += store.services_between(a->station_id, b->station_id, q.date, std::nullopt).size();
      if (rf.kind == Kind::Exact && rt.kind == Kind::Exact && a == rf.stations[0] && b == rt.stations[0])
        continue;
      auto n = store.services_between(a->station_id, b->station_id, q.date, q.time_window).size();
      if (n > best_count) {  // groups are name-ordered, so first max wins ties
        best_count = n;
        best_from = a;
        best_to = b;
      }
    }
  }

  auto payload = query_payload(q);
  if (best_count > 0) {
    payload["suggestion"] = {{"from", best_from->name}, {"to", best_to->name}, {"services", best_count}};
    return fail(error_info, errc::kNoDirectService,
                "no direct train service exists between " + q.from + " and " + q.to + " " + when(q) +
                    ". Suggestion: the closest alternative route is " + best_from->name + " -> " +
                    best_to->name + " with " + std::to_string(best_count) +
                    " service(s) that day; retry with from=" + best_from->name + ", to=" + best_to->name + ".",
                std::move(payload));
  }
  if (q.time_window && day_count > 0) {
    payload["services_outside_window"] = day_count;
    return fail(error_info, errc::kTimeWindowEmpty,
                "no trains between " + rf.city + " and " + rt.city + " depart within " +
                    q.time_window->describe() + " on " + format_date(q.date) + "; " +
                    std::to_string(day_count) + " service(s) run outside that window.",
                std::move(payload));
  }
  return fail(error_info, errc::kNoService,
              "no train services run between " + rf.city + " and " + rt.city + " on " +
                  format_date(q.date) + ".",
              std::move(payload));
}

ObservationResult ticketing_from_slots(const SlotMap& slots, const ScheduleStore& store,
                                       const Clock& clock, bool error_info) {
  TicketQuery q;
  q.from = slots.get("from").value_or("");
  q.to = slots.get("to").value_or("");
  auto date_expr = slots.get("date").value_or("");
  ordered_json payload;
  payload["from"] = q.from;
  payload["to"] = q.to;
  payload["date"] = date_expr;

  auto today = clock.today();
  auto date = resolve_date_expression(date_expr, today);
  if (!date)
    return fail(error_info, errc::kUnresolvableDate,
                "could not resolve travel date \"" + date_expr +
                    "\"; use today, tomorrow, day after tomorrow, a weekday name or YYYY-MM-DD.",
                std::move(payload));
  if (*date < today)
    return fail(error_info, errc::kDateInPast,
                "travel date " + format_date(*date) + " is in the past (today is " + format_date(today) + ").",
                std::move(payload));
  q.date = *date;
  try {
    q.time_window = parse_time_window(slots.get("time").value_or(""));
  } catch (const std::invalid_argument& e) {
    return fail(error_info, errc::kInvalidTime,
                std::string(e.what()) + "; use morning, afternoon, evening or HH:MM-HH:MM.",
                std::move(payload));
  }
  return query_tickets(q, store, error_info);
}

}  // namespace railagent
