#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "railagent/observation.hpp"
#include "railagent/slots.hpp"

namespace railagent {

/// The closed action space the agent may select from.
enum class ToolName { FoodDrink, Ticketing, Weather, ChitChat };

std::string_view tool_display_name(ToolName t);
std::optional<ToolName> parse_tool_name(std::string_view s);
inline constexpr ToolName kAllTools[] = {ToolName::FoodDrink, ToolName::Ticketing,
                                         ToolName::Weather, ToolName::ChitChat};

struct FinalAnswer {
  std::string text;
  friend bool operator==(const FinalAnswer&, const FinalAnswer&) = default;
};

struct ToolCall {
  ToolName tool;
  SlotMap input;
  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

using AgentAction = std::variant<FinalAnswer, ToolCall>;

struct QtaoStep {
  int iteration = 0;
  std::string thought;
  AgentAction action;
  std::optional<ObservationResult> observation;  // present iff action is a ToolCall
};

enum class RoundOutcome { Answered, BudgetExhausted, ParseFailed, ToolFailed };
std::string_view outcome_name(RoundOutcome o);
std::optional<RoundOutcome> parse_outcome(std::string_view s);

struct QtaoTrace {
  int round_index = 1;
  std::string question;
  std::vector<QtaoStep> steps;
  std::optional<std::string> answer;
  RoundOutcome outcome = RoundOutcome::BudgetExhausted;
};

class BasePrompt {
 public:
  using ToolDescription = std::pair<std::string, std::string>;

  /// `preamble` may contain a "{tools}" placeholder that is replaced by the
  /// tool listing; otherwise the listing is appended.
  BasePrompt(std::string_view preamble, std::vector<ToolDescription> tools);

  const std::string& text() const { return text_; }
  const std::vector<ToolDescription>& tool_descriptions() const { return tools_; }

  /// Same tools, extra context (prior-round summaries) appended to the text.
  BasePrompt with_context(std::string_view context) const;

 private:
  BasePrompt() = default;
  std::string text_;
  std::vector<ToolDescription> tools_;
};

inline constexpr std::string_view kQuestionMarker = "Question:";
inline constexpr std::string_view kThoughtMarker = "Thought:";
inline constexpr std::string_view kActionMarker = "Action:";
inline constexpr std::string_view kActionInputMarker = "Action Input:";
inline constexpr std::string_view kObservationMarker = "Observation:";
inline constexpr std::string_view kFinalAnswerMarker = "Final Answer:";

/// Assembles [B, Q, T1, A1, O1, ..., T(n-1), A(n-1), O(n-1)].
std::string build_prompt(const BasePrompt& base, std::string_view question,
                         const std::vector<QtaoStep>& prior_steps);

class AgentParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParsedOutput {
  std::string thought;
  AgentAction action;
};

/// Throws AgentParseError when the completion does not follow the grammar.
ParsedOutput parse_agent_output(std::string_view raw);
std::string render_agent_output(std::string_view thought, const AgentAction& action);

enum class Branch { Answer, InvokeTool };
/// The answer-vs-tool decision is taken from the action variant alone.
Branch decide_branch(std::string_view thought, const AgentAction& action);

nlohmann::ordered_json to_json(const ObservationResult& obs);
nlohmann::ordered_json to_json(const AgentAction& action);
nlohmann::ordered_json to_json(const QtaoTrace& trace);
QtaoTrace trace_from_json(const nlohmann::ordered_json& j);
/// Canonical single-line record.
std::string serialize_trace(const QtaoTrace& trace);

}  // namespace railagent
