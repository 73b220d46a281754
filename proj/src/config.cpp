#include "railagent/config.hpp"

#include <fstream>
#include <map>

namespace railagent {

namespace {

void flatten(const nlohmann::json& j, const std::string& prefix, std::map<std::string, nlohmann::json>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else {
    out[prefix] = j;
  }
}

}  // namespace

AppConfig AppConfig::defaults(const std::filesystem::path& data_dir) {
  AppConfig c;
  c.corpus_path = data_dir / "corpus" / "sample_corpus.jsonl";
  c.timetable_path = data_dir / "timetable" / "sample_timetable.jsonl";
  c.weather.fixture_path = data_dir / "weather" / "forecasts.jsonl";
  c.base_prompt_path = data_dir / "prompts" / "base_prompt.txt";
  c.recommender.task_template_path = data_dir / "prompts" / "rec_task.txt";
  c.recommender.format_template_path = data_dir / "prompts" / "rec_format.txt";
  return c;
}

void AppConfig::apply(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  std::map<std::string, nlohmann::json> kv;
  flatten(j, "", kv);
  auto path = [&](const nlohmann::json& v) {
    std::filesystem::path p = v.get<std::string>();
    return p.is_relative() ? base_dir / p : p;
  };
  for (const auto& [key, v] : kv) {
    if (key == "qtao.max_iterations") qtao.max_iterations = v.get<int>();
    else if (key == "qtao.error_info_enabled") qtao.error_info_enabled = v.get<bool>();
    else if (key == "qtao.repair_reprompts") qtao.repair_reprompts = v.get<int>();
    else if (key == "llm.model_id") llm.model_id = v.get<std::string>();
    else if (key == "llm.endpoint_url") llm.endpoint_url = v.get<std::string>();
    else if (key == "llm.api_key_env") llm.api_key_env = v.get<std::string>();
    else if (key == "llm.temperature") llm.temperature = v.get<double>();
    else if (key == "llm.max_tokens") llm.max_tokens = v.get<int>();
    else if (key == "llm.timeout_ms") llm.timeout = std::chrono::milliseconds(v.get<long>());
    else if (key == "llm.retries") llm.retries = v.get<int>();
    else if (key == "llm.retry_backoff_ms") llm.retry_backoff = std::chrono::milliseconds(v.get<long>());
    else if (key == "weather.provider") weather.provider = v.get<std::string>();
    else if (key == "weather.horizon_days") weather.horizon_days = v.get<int>();
    else if (key == "weather.fixture_path") weather.fixture_path = path(v);
    else if (key == "weather.amap.base_url") weather.amap.base_url = v.get<std::string>();
    else if (key == "weather.amap.api_key_env") weather.amap.api_key_env = v.get<std::string>();
    else if (key == "weather.amap.max_in_flight") weather.amap.max_in_flight = v.get<int>();
    else if (key == "recommender.k") recommender.k = v.get<int>();
    else if (key == "recommender.city_filter") recommender.city_filter = v.get<bool>();
    else if (key == "recommender.task_template") recommender.task_template_path = path(v);
    else if (key == "recommender.format_template") recommender.format_template_path = path(v);
    else if (key == "corpus.path") corpus_path = path(v);
    else if (key == "timetable.path") timetable_path = path(v);
    else if (key == "qtao.base_prompt") base_prompt_path = path(v);
    else if (key == "sessions.store_dir") session_store_dir = path(v);
    else throw std::invalid_argument("unknown config key \"" + key + "\"");
  }
  qtao.validate();
  llm.validate();
  if (weather.provider != "fixture" && weather.provider != "amap")
    throw std::invalid_argument("weather.provider must be fixture or amap");
  if (recommender.k < 1) throw std::invalid_argument("recommender.k must be >= 1");
}

AppConfig AppConfig::load(const std::filesystem::path& path, const std::filesystem::path& data_dir) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  auto c = defaults(data_dir);
  c.apply(nlohmann::json::parse(in), path.parent_path());
  return c;
}

}  // namespace railagent
