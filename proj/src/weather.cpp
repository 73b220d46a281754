#include "railagent/weather.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "railagent/text.hpp"

namespace railagent {

using nlohmann::ordered_json;

WeatherQuery resolve_weather_query(const SlotMap& slots, const Clock& clock) {
  auto place = trim(slots.get("place").value_or(""));
  auto time = trim(slots.get("time").value_or(""));
  if (place.empty()) throw WeatherError(errc::kUnknownCity, "no city given for the weather query");
  auto date = resolve_date_expression(time, clock.today());
  if (!date)
    throw WeatherError(errc::kUnresolvableDate, "could not resolve date \"" + time +
                                                    "\"; use today, tomorrow, day after tomorrow, a "
                                                    "weekday name or YYYY-MM-DD");
  return {place, time, *date};
}

ForecastTable load_forecasts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open weather fixture " + path.string());
  ForecastTable table;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      auto j = ordered_json::parse(t);
      Forecast f;
      f.city = j.at("city").get<std::string>();
      auto d = parse_date(j.at("date").get<std::string>());
      if (!d) throw std::runtime_error("bad date");
      f.date = *d;
      f.condition = j.at("condition").get<std::string>();
      f.temp_low = j.at("temp_low").get<double>();
      f.temp_high = j.at("temp_high").get<double>();
      if (f.temp_low > f.temp_high) throw std::runtime_error("temp_low above temp_high");
      f.wind = j.value("wind", "");
      f.source = "fixture";
      table[normalize_name(f.city)][f.date] = f;
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return table;
}

FixtureProvider::FixtureProvider(std::shared_ptr<const ForecastTable> table, const Clock& clock,
                                 int horizon_days)
    : table_(std::move(table)), clock_(clock), horizon_days_(horizon_days) {}

FixtureProvider::FixtureProvider(const std::filesystem::path& path, const Clock& clock, int horizon_days)
    : FixtureProvider(std::make_shared<const ForecastTable>(load_forecasts(path)), clock, horizon_days) {}

Forecast FixtureProvider::fetch(std::string_view city, Days date) {
  auto it = table_->find(normalize_name(city));
  if (it == table_->end())
    throw WeatherError(errc::kUnknownCity, "unknown city \"" + std::string(city) + "\"");
  auto today = clock_.today();
  if (date < today || date > today + std::chrono::days{horizon_days_})
    throw WeatherError(errc::kForecastUnavailable,
                       "forecast unavailable for date " + format_date(date) + " (available " +
                           format_date(today) + " to " +
                           format_date(today + std::chrono::days{horizon_days_}) + ")");
  auto f = it->second.find(date);
  if (f == it->second.end())
    throw WeatherError(errc::kForecastUnavailable, "forecast unavailable for date " + format_date(date));
  return f->second;
}

AmapAdapter::AmapAdapter(AmapConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      in_flight_(std::clamp(config_.max_in_flight, 1, 64)) {
  if (const char* key = std::getenv(config_.api_key_env.c_str())) key_ = key;
}

std::string AmapAdapter::get_json_body(const std::string& path_and_query) {
  HttpRequest req;
  req.url = config_.base_url + path_and_query + "&key=" + url_encode(key_);
  HttpResponse res;
  {
    in_flight_.acquire();
    struct Release {
      std::counting_semaphore<64>& sem;
      ~Release() { sem.release(); }
    } permit{in_flight_};
    try {
      res = transport_->send(req);
    } catch (const TransportError& e) {
      throw WeatherError(errc::kProviderError, std::string("weather provider unreachable: ") + e.what());
    }
  }
  if (res.status != 200)
    throw WeatherError(errc::kProviderError, "weather provider returned HTTP " + std::to_string(res.status));
  return res.body;
}

Forecast AmapAdapter::fetch(std::string_view city, Days date) {
  ordered_json district, weather;
  try {
    district = ordered_json::parse(
        get_json_body("/v3/config/district?subdistrict=0&keywords=" + url_encode(city)));
    if (district.value("status", "0") != "1")
      throw WeatherError(errc::kProviderError, "district lookup failed: " + district.value("info", "unknown"));
    const auto& districts = district.at("districts");
    if (!districts.is_array() || districts.empty())
      throw WeatherError(errc::kUnknownCity, "unknown city \"" + std::string(city) + "\"");
    auto adcode = districts.at(0).at("adcode").get<std::string>();

    weather = ordered_json::parse(get_json_body("/v3/weather/weatherInfo?extensions=all&city=" + adcode));
    if (weather.value("status", "0") != "1")
      throw WeatherError(errc::kProviderError, "forecast lookup failed: " + weather.value("info", "unknown"));
    const auto& forecasts = weather.at("forecasts");
    if (!forecasts.is_array() || forecasts.empty())
      throw WeatherError(errc::kUnknownCity, "no forecast for \"" + std::string(city) + "\"");
    const auto& fc = forecasts.at(0);
    auto want = format_date(date);
    for (const auto& cast : fc.at("casts")) {
      if (cast.at("date").get<std::string>() != want) continue;
      Forecast f;
      f.city = fc.at("city").get<std::string>();
      f.date = date;
      f.condition = cast.at("dayweather").get<std::string>();
      double day = std::stod(cast.at("daytemp").get<std::string>());
      double night = std::stod(cast.at("nighttemp").get<std::string>());
      f.temp_low = std::min(day, night);
      f.temp_high = std::max(day, night);
      f.wind = cast.at("daywind").get<std::string>() + " " + cast.at("daypower").get<std::string>();
      f.source = "amap";
      return f;
    }
    throw WeatherError(errc::kForecastUnavailable, "forecast unavailable for date " + want);
  } catch (const nlohmann::json::exception& e) {
    throw WeatherError(errc::kProviderError, std::string("malformed provider response: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw WeatherError(errc::kProviderError, std::string("malformed temperature: ") + e.what());
  }
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

ObservationResult get_weather(const WeatherQuery& q, WeatherProvider& provider) {
  ordered_json payload;
  payload["city"] = q.place;
  payload["date"] = format_date(q.date);
  try {
    auto f = provider.fetch(q.place, q.date);
    payload["city"] = f.city;
    payload["condition"] = f.condition;
    payload["temp_low"] = f.temp_low;
    payload["temp_high"] = f.temp_high;
    payload["wind"] = f.wind;
    payload["source"] = f.source;
    auto text = "Weather for " + f.city + " on " + format_date(f.date) + ": " + f.condition + ", " +
                num(f.temp_low) + " to " + num(f.temp_high) + " degrees C" +
                (f.wind.empty() ? "" : ", wind " + f.wind) + " (source: " + f.source + ")";
    return ObservationResult::success(std::move(text), std::move(payload));
  } catch (const WeatherError& e) {
    payload["error"] = e.code();
    return ObservationResult::error(e.code(), std::string("Error: ") + e.what(), std::move(payload));
  }
}

ObservationResult weather_from_slots(const SlotMap& slots, WeatherProvider& provider, const Clock& clock) {
  try {
    return get_weather(resolve_weather_query(slots, clock), provider);
  } catch (const WeatherError& e) {
    ordered_json payload;
    payload["place"] = slots.get("place").value_or("");
    payload["time"] = slots.get("time").value_or("");
    payload["error"] = e.code();
    return ObservationResult::error(e.code(), std::string("Error: ") + e.what(), std::move(payload));
  }
}

}  // namespace railagent
