#include "railagent/llm_backend.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

namespace railagent {

void LlmConfig::validate() const {
  if (timeout.count() <= 0) throw std::invalid_argument("llm.timeout must be positive");
  if (retries < 0 || retries > 5) throw std::invalid_argument("llm.retries must be within 0..5");
  if (temperature < 0) throw std::invalid_argument("llm.temperature must be >= 0");
  if (max_tokens <= 0) throw std::invalid_argument("llm.max_tokens must be positive");
}

std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop) {
  size_t cut = text.size();
  for (const auto& s : stop) {
    if (s.empty()) continue;
    auto pos = text.find(s);
    if (pos != std::string::npos && pos < cut) cut = pos;
  }
  text.resize(cut);
  return text;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries, bool strict) : strict_(strict) {
  for (size_t i = 0; i < entries.size(); ++i) {
    auto& e = entries[i];
    if (e.matcher.empty()) throw ScriptError("script entry " + std::to_string(i) + ": empty matcher");
    for (size_t k = 0; k < i; ++k)
      if (entries[k].match == e.match && entries[k].matcher == e.matcher && !entries[k].consume_once)
        throw ScriptError("script entry " + std::to_string(i) + " duplicates entry " +
                          std::to_string(k) + " and can never be reached");
    Live live{e, {}, false};
    if (e.match == ScriptEntry::Match::Pattern) {
      try {
        live.re = std::regex(e.matcher, std::regex::ECMAScript);
      } catch (const std::regex_error& err) {
        throw ScriptError("script entry " + std::to_string(i) + ": bad pattern: " + err.what());
      }
    }
    entries_.push_back(std::move(live));
  }
}

ScriptedBackend ScriptedBackend::from_json(const nlohmann::json& j, bool strict) {
  std::vector<ScriptEntry> entries;
  const auto& arr = j.is_array() ? j : j.at("entries");
  for (const auto& je : arr) {
    ScriptEntry e;
    if (je.contains("substring")) {
      e.match = ScriptEntry::Match::Substring;
      e.matcher = je.at("substring").get<std::string>();
    } else if (je.contains("pattern")) {
      e.match = ScriptEntry::Match::Pattern;
      e.matcher = je.at("pattern").get<std::string>();
    } else {
      throw ScriptError("script entry needs \"substring\" or \"pattern\"");
    }
    e.completion = je.at("completion").get<std::string>();
    e.consume_once = je.value("consume_once", false);
    entries.push_back(std::move(e));
  }
  return ScriptedBackend(std::move(entries), strict);
}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw ScriptError("cannot open script " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ScriptError(path.string() + ": " + e.what());
  }
  return from_json(j, strict);
}

bool ScriptedBackend::matches(const Live& l, std::string_view prompt) const {
  if (l.consumed) return false;
  if (l.entry.match == ScriptEntry::Match::Substring)
    return prompt.find(l.entry.matcher) != std::string_view::npos;
  return std::regex_search(prompt.begin(), prompt.end(), l.re);
}

std::string ScriptedBackend::complete(std::string_view prompt, const std::vector<std::string>& stop) {
  std::lock_guard lock(mu_);
  prompts_.emplace_back(prompt);
  Live* hit = nullptr;
  for (auto& l : entries_) {
    if (!matches(l, prompt)) continue;
    if (!hit) {
      hit = &l;
      if (!strict_) break;
    } else if (l.entry.match != hit->entry.match || l.entry.matcher != hit->entry.matcher) {
      // identical matchers form a queue; only distinct matchers conflict
      throw ScriptError("ambiguous script: entries \"" + hit->entry.matcher + "\" and \"" +
                        l.entry.matcher + "\" both match");
    }
  }
  if (!hit) {
    auto tail = prompt.size() > 160 ? prompt.substr(prompt.size() - 160) : prompt;
    throw NoScriptMatch("no script entry matches prompt ending: ..." + std::string(tail));
  }
  if (hit->entry.consume_once) hit->consumed = true;
  return truncate_at_stop(hit->entry.completion, stop);
}

std::vector<std::string> ScriptedBackend::prompts() const {
  std::lock_guard lock(mu_);
  return prompts_;
}

size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  size_t n = 0;
  for (const auto& l : entries_) n += !l.consumed;
  return n;
}

OpenAiBackend::OpenAiBackend(LlmConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  if (!config_.api_key_env.empty())
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

nlohmann::json OpenAiBackend::request_body(std::string_view prompt,
                                           const std::vector<std::string>& stop) const {
  nlohmann::json body;
  body["model"] = config_.model_id;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = config_.temperature;
  body["max_tokens"] = config_.max_tokens;
  if (!stop.empty()) body["stop"] = stop;
  return body;
}

std::string OpenAiBackend::complete(std::string_view prompt, const std::vector<std::string>& stop) {
  if (prompt.empty()) throw std::invalid_argument("prompt must be non-empty");
  HttpRequest req;
  req.method = "POST";
  req.url = config_.endpoint_url;
  while (!req.url.empty() && req.url.back() == '/') req.url.pop_back();
  req.url += "/chat/completions";
  req.headers["Content-Type"] = "application/json";
  if (!api_key_.empty()) req.headers["Authorization"] = "Bearer " + api_key_;
  req.body = request_body(prompt, stop).dump();
  req.timeout = config_.timeout;

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0 && config_.retry_backoff.count() > 0)
      std::this_thread::sleep_for(config_.retry_backoff * attempt);
    HttpResponse res;
    try {
      res = transport_->send(req);
    } catch (const TransportError& e) {
      last_error = e.what();
      continue;
    }
    if (res.status == 429 || res.status >= 500) {
      last_error = "HTTP " + std::to_string(res.status);
      continue;
    }
    if (res.status != 200)
      throw TransportError("chat completion rejected: HTTP " + std::to_string(res.status) + ": " +
                           res.body.substr(0, 200));
    try {
      auto j = nlohmann::json::parse(res.body);
      auto text = j.at("choices").at(0).at("message").at("content").get<std::string>();
      return truncate_at_stop(std::move(text), stop);
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("malformed chat completion response: ") + e.what());
    }
  }
  throw TransportError("chat completion failed after " + std::to_string(config_.retries + 1) +
                       " attempts: " + last_error);
}

}  // namespace railagent
