#pragma once

#include <memory>
#include <string>

#include "railagent/config.hpp"
#include "railagent/corpus.hpp"
#include "railagent/engine.hpp"
#include "railagent/recommender.hpp"
#include "railagent/ticketing.hpp"
#include "railagent/weather.hpp"

namespace railagent {

/// Immutable data shared by every session and scenario.
struct SharedStores {
  std::shared_ptr<const Corpus> corpus;
  std::shared_ptr<const ScheduleStore> timetable;
  std::shared_ptr<const ForecastTable> forecasts;
  std::string base_preamble;
  RecPromptTemplate rec_template;
};

SharedStores load_stores(const AppConfig& config);

/// One wired-up agent: engine plus the tools' per-agent dependencies.
struct Agent {
  std::unique_ptr<WeatherProvider> weather;
  std::unique_ptr<QtaoEngine> engine;
};

Agent build_agent(const SharedStores& stores, const AppConfig& config, LlmBackend& backend,
                  const Clock& clock, std::shared_ptr<HttpTransport> transport = nullptr);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace railagent
