#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "railagent/engine.hpp"
#include "railagent/llm_backend.hpp"
#include "railagent/weather.hpp"

namespace railagent {

struct WeatherSettings {
  std::string provider = "fixture";  // fixture | amap
  int horizon_days = 3;
  std::filesystem::path fixture_path;
  AmapConfig amap;
};

struct RecommenderSettings {
  int k = 10;
  bool city_filter = false;
  std::filesystem::path task_template_path;    // empty = built-in
  std::filesystem::path format_template_path;  // empty = built-in
};

/// Application settings. Files may use nested objects ({"qtao": {...}}) or
/// flat dotted keys ("qtao.max_iterations"); relative paths resolve against
/// the config file's directory.
struct AppConfig {
  QtaoConfig qtao;
  LlmConfig llm;
  WeatherSettings weather;
  RecommenderSettings recommender;
  std::filesystem::path corpus_path;
  std::filesystem::path timetable_path;
  std::filesystem::path base_prompt_path;  // empty = built-in
  std::optional<std::filesystem::path> session_store_dir;

  /// Defaults pointing at the sample data shipped in `data_dir`.
  static AppConfig defaults(const std::filesystem::path& data_dir);
  static AppConfig load(const std::filesystem::path& path, const std::filesystem::path& data_dir);
  void apply(const nlohmann::json& j, const std::filesystem::path& base_dir);
};

}  // namespace railagent
