#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>

#include "railagent/clock.hpp"
#include "railagent/http.hpp"
#include "railagent/observation.hpp"
#include "railagent/slots.hpp"

namespace railagent {

/// Failure with one of the errc codes (UnresolvableDate, UnknownCity, ...).
class WeatherError : public std::runtime_error {
 public:
  WeatherError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

struct WeatherQuery {
  std::string place;
  std::string time;
  Days date;
};

/// Slots {place, time} -> query with a concrete date. Only the injected clock
/// is consulted.
WeatherQuery resolve_weather_query(const SlotMap& slots, const Clock& clock);

struct Forecast {
  std::string city;
  Days date;
  std::string condition;
  double temp_low = 0;
  double temp_high = 0;
  std::string wind;
  std::string source;
};

class WeatherProvider {
 public:
  virtual ~WeatherProvider() = default;
  /// Throws WeatherError(UnknownCity | ForecastUnavailable | ProviderError).
  virtual Forecast fetch(std::string_view city, Days date) = 0;
};

/// Forecast records keyed by normalized city, loaded from JSONL
/// {city, date, condition, temp_low, temp_high, wind}.
using ForecastTable = std::map<std::string, std::map<Days, Forecast>>;
ForecastTable load_forecasts(const std::filesystem::path& path);

/// Table-backed provider. Dates before today or beyond today + horizon are
/// unavailable.
class FixtureProvider final : public WeatherProvider {
 public:
  FixtureProvider(std::shared_ptr<const ForecastTable> table, const Clock& clock, int horizon_days = 3);
  FixtureProvider(const std::filesystem::path& path, const Clock& clock, int horizon_days = 3);
  Forecast fetch(std::string_view city, Days date) override;

 private:
  std::shared_ptr<const ForecastTable> table_;
  const Clock& clock_;
  int horizon_days_;
};

struct AmapConfig {
  std::string base_url = "https://restapi.amap.com";
  std::string api_key_env = "AMAP_KEY";
  int max_in_flight = 4;
};

/// Amap web-service client: district lookup for the city adcode, then the
/// weatherInfo forecast. Output is a projection of the upstream fields.
class AmapAdapter final : public WeatherProvider {
 public:
  AmapAdapter(AmapConfig config, std::shared_ptr<HttpTransport> transport);
  Forecast fetch(std::string_view city, Days date) override;

 private:
  std::string get_json_body(const std::string& path_and_query);

  AmapConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  std::string key_;
  std::counting_semaphore<64> in_flight_;
};

ObservationResult get_weather(const WeatherQuery& q, WeatherProvider& provider);
ObservationResult weather_from_slots(const SlotMap& slots, WeatherProvider& provider, const Clock& clock);

}  // namespace railagent
