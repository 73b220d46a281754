#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "railagent/clock.hpp"
#include "railagent/conversation.hpp"
#include "railagent/llm_backend.hpp"
#include "railagent/observation.hpp"
#include "railagent/qtao.hpp"
#include "railagent/recommender.hpp"

namespace railagent {

struct ToolContext {
  const ConversationHistory& history;
  bool error_info = true;
  const PassengerProfile* profile = nullptr;
};

/// A tool never throws past invoke(): the registry converts exceptions into
/// ErrorInfo observations.
struct ToolContract {
  ToolName name;
  std::string description;
  std::vector<std::string> required_slots;
  std::function<ObservationResult(const SlotMap&, const ToolContext&)> invoke;
};

class ToolRegistry {
 public:
  void register_tool(ToolContract tool);
  const ToolContract* find(ToolName name) const;
  std::vector<BasePrompt::ToolDescription> descriptions() const;
  ObservationResult invoke(ToolName name, const SlotMap& slots, const ToolContext& ctx) const;

 private:
  std::map<ToolName, ToolContract> tools_;
};

struct QtaoConfig {
  int max_iterations = 5;
  bool error_info_enabled = true;
  int repair_reprompts = 1;
  void validate() const;
};

/// Per-session conversation state C_{1:t}. Traces are append-only.
struct SessionState {
  std::string session_id;
  PassengerProfile profile;
  std::vector<QtaoTrace> history;
  std::vector<std::string> trace_records;  // canonical serialization per round
  LocalTime created_at{};
  std::optional<int> max_iterations;
  std::optional<bool> error_info;

  /// Prior questions/answers followed by `current` (when non-empty).
  ConversationHistory conversation(std::string_view current = {}) const;
};

class SlotExtractionFailed : public std::runtime_error {
 public:
  SlotExtractionFailed(std::vector<std::string> missing);
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

std::string_view default_base_preamble();
std::string_view format_reminder();

/// Iterative Question-Thought-Action-Observation loop.
class QtaoEngine {
 public:
  using TraceSink = std::function<void(const std::string& record)>;

  QtaoEngine(std::string_view base_preamble, ToolRegistry tools, LlmBackend& backend,
             QtaoConfig config = {});

  /// Runs one round and appends the trace to the session. Transport failures
  /// of the backend propagate; everything else ends up in the trace outcome.
  QtaoTrace run_round(SessionState& session, std::string_view question,
                      std::optional<int> budget = std::nullopt) const;

  /// Asks the model for the tool's parameters over the whole history. `known`
  /// slots take precedence. Throws SlotExtractionFailed if required slots are
  /// still missing after one re-prompt.
  SlotMap extract_action_input(const ConversationHistory& history, ToolName tool,
                               const SlotMap& known = {}) const;

  const BasePrompt& base_prompt() const { return base_; }
  const QtaoConfig& config() const { return config_; }
  void set_trace_sink(TraceSink sink) { sink_ = std::move(sink); }

 private:
  std::vector<std::string> missing_slots(ToolName tool, const SlotMap& slots) const;

  BasePrompt base_;
  ToolRegistry tools_;
  LlmBackend& backend_;
  QtaoConfig config_;
  TraceSink sink_;
};

/// Plain conversational completion over the history; throws
/// std::invalid_argument("no user utterance") on an empty history.
std::string chitchat(const ConversationHistory& history, LlmBackend& backend);

}  // namespace railagent
