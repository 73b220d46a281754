#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "railagent/http.hpp"

namespace railagent {

struct LlmConfig {
  std::string model_id = "gpt-4o";
  std::string endpoint_url = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  int max_tokens = 1024;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
  std::chrono::milliseconds retry_backoff{500};

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

class NoScriptMatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  /// Returns the completion, cut before the earliest stop marker.
  virtual std::string complete(std::string_view prompt, const std::vector<std::string>& stop) = 0;
};

std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop);

struct ScriptEntry {
  enum class Match { Substring, Pattern };
  Match match = Match::Substring;
  std::string matcher;
  std::string completion;
  bool consume_once = false;
};

/// Deterministic stand-in for the model: each prompt is answered by the
/// first live entry whose matcher hits. In strict mode a prompt matched by
/// more than one live entry is a fixture bug and raises ScriptError.
class ScriptedBackend final : public LlmBackend {
 public:
  explicit ScriptedBackend(std::vector<ScriptEntry> entries, bool strict = true);

  static ScriptedBackend from_json(const nlohmann::json& j, bool strict = true);
  static ScriptedBackend from_file(const std::filesystem::path& path, bool strict = true);

  std::string complete(std::string_view prompt, const std::vector<std::string>& stop) override;

  std::vector<std::string> prompts() const;
  size_t remaining() const;

 private:
  struct Live {
    ScriptEntry entry;
    std::regex re;
    bool consumed = false;
  };
  bool matches(const Live& l, std::string_view prompt) const;

  mutable std::mutex mu_;
  std::vector<Live> entries_;
  std::vector<std::string> prompts_;
  bool strict_;
};

/// Client for the OpenAI-compatible chat-completions protocol. The prompt is
/// sent as one user message.
class OpenAiBackend final : public LlmBackend {
 public:
  OpenAiBackend(LlmConfig config, std::shared_ptr<HttpTransport> transport);

  std::string complete(std::string_view prompt, const std::vector<std::string>& stop) override;

  const LlmConfig& config() const { return config_; }

 private:
  nlohmann::json request_body(std::string_view prompt, const std::vector<std::string>& stop) const;

  LlmConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  std::string api_key_;
};

}  // namespace railagent
