#include "railagent/qtao.hpp"

#include <array>
#include <set>

#include "railagent/text.hpp"

namespace railagent {

std::string_view tool_display_name(ToolName t) {
  switch (t) {
    case ToolName::FoodDrink: return "F&D Recommendation";
    case ToolName::Ticketing: return "Ticketing";
    case ToolName::Weather: return "Weather";
    case ToolName::ChitChat: return "ChitChat";
  }
  return "?";
}

std::optional<ToolName> parse_tool_name(std::string_view s) {
  static const std::array<std::pair<std::string_view, ToolName>, 10> kAliases = {{
      {"f d recommendation", ToolName::FoodDrink},
      {"food drink recommendation", ToolName::FoodDrink},
      {"food and drink recommendation", ToolName::FoodDrink},
      {"fd recommendation", ToolName::FoodDrink},
      {"ticketing", ToolName::Ticketing},
      {"ticket inquiry", ToolName::Ticketing},
      {"weather", ToolName::Weather},
      {"chitchat", ToolName::ChitChat},
      {"chit chat", ToolName::ChitChat},
      {"chit-chat", ToolName::ChitChat},
  }};
  auto norm = normalize_name(s);
  for (const auto& [alias, tool] : kAliases)
    if (norm == alias) return tool;
  return std::nullopt;
}

std::string_view outcome_name(RoundOutcome o) {
  switch (o) {
    case RoundOutcome::Answered: return "Answered";
    case RoundOutcome::BudgetExhausted: return "BudgetExhausted";
    case RoundOutcome::ParseFailed: return "ParseFailed";
    case RoundOutcome::ToolFailed: return "ToolFailed";
  }
  return "?";
}

std::optional<RoundOutcome> parse_outcome(std::string_view s) {
  for (auto o : {RoundOutcome::Answered, RoundOutcome::BudgetExhausted, RoundOutcome::ParseFailed,
                 RoundOutcome::ToolFailed})
    if (outcome_name(o) == s) return o;
  return std::nullopt;
}

BasePrompt::BasePrompt(std::string_view preamble, std::vector<ToolDescription> tools)
    : tools_(std::move(tools)) {
  std::set<std::string> seen;
  std::string listing;
  for (const auto& [name, desc] : tools_) {
    if (name.empty()) throw std::invalid_argument("tool name must be non-empty");
    if (!seen.insert(name).second) throw std::invalid_argument("duplicate tool name: " + name);
    listing += "- " + name + ": " + desc + "\n";
  }
  std::string text(preamble);
  auto pos = text.find("{tools}");
  if (pos != std::string::npos)
    text.replace(pos, 7, listing);
  else
    text += (text.empty() ? "" : "\n") + listing;
  text_ = trim(text);
  if (text_.empty()) throw std::invalid_argument("base prompt text must be non-empty");
}

BasePrompt BasePrompt::with_context(std::string_view context) const {
  BasePrompt copy;
  copy.tools_ = tools_;
  copy.text_ = context.empty() ? text_ : text_ + "\n\n" + std::string(context);
  return copy;
}

std::string build_prompt(const BasePrompt& base, std::string_view question,
                         const std::vector<QtaoStep>& prior_steps) {
  std::string out = base.text();
  out += "\n\n";
  out += kQuestionMarker;
  out += " ";
  out += question;
  for (const auto& step : prior_steps) {
    out += "\n";
    out += render_agent_output(step.thought, step.action);
    out += "\n";
    out += kObservationMarker;
    out += " ";
    out += step.observation ? step.observation->text : std::string{};
  }
  return out;
}

namespace {

enum class Marker { Thought, Action, ActionInput, FinalAnswer, Observation, Question };

struct MarkerHit {
  Marker marker;
  std::string rest;  // text after the marker on the same line
};

std::optional<MarkerHit> match_marker(std::string_view line) {
  static const std::array<std::pair<std::string_view, Marker>, 6> kMarkers = {{
      {kActionInputMarker, Marker::ActionInput},  // before "Action:"
      {kActionMarker, Marker::Action},
      {kThoughtMarker, Marker::Thought},
      {kFinalAnswerMarker, Marker::FinalAnswer},
      {kObservationMarker, Marker::Observation},
      {kQuestionMarker, Marker::Question},
  }};
  auto l = trim(line);
  for (const auto& [text, m] : kMarkers)
    if (starts_with_ci(l, text)) return MarkerHit{m, trim(std::string_view(l).substr(text.size()))};
  return std::nullopt;
}

}  // namespace

ParsedOutput parse_agent_output(std::string_view raw) {
  auto lines = split_lines(raw);
  std::vector<std::optional<MarkerHit>> hits;
  hits.reserve(lines.size());
  for (const auto& l : lines) hits.push_back(match_marker(l));

  auto first = [&](Marker m) -> std::optional<size_t> {
    for (size_t i = 0; i < hits.size(); ++i)
      if (hits[i] && hits[i]->marker == m) return i;
    return std::nullopt;
  };
  // marker content plus continuation lines up to the next marker
  auto block = [&](size_t i, bool to_end) {
    std::string text = hits[i]->rest;
    for (size_t j = i + 1; j < lines.size(); ++j) {
      if (!to_end && hits[j]) break;
      text += "\n" + lines[j];
    }
    return trim(text);
  };

  auto thought_at = first(Marker::Thought);
  if (!thought_at) throw AgentParseError("missing \"Thought:\" marker");
  auto thought = block(*thought_at, false);

  auto answer_at = first(Marker::FinalAnswer);
  auto action_at = first(Marker::Action);
  if (!answer_at && !action_at)
    throw AgentParseError("neither \"Action:\" nor \"Final Answer:\" present");

  if (answer_at && (!action_at || *answer_at < *action_at)) {
    auto answer = block(*answer_at, true);
    if (answer.empty()) throw AgentParseError("empty final answer");
    return {std::move(thought), FinalAnswer{std::move(answer)}};
  }

  auto tool = parse_tool_name(hits[*action_at]->rest);
  if (!tool) throw AgentParseError("unknown tool \"" + hits[*action_at]->rest + "\"");
  SlotMap input;
  if (auto input_at = first(Marker::ActionInput)) input = parse_slot_line(hits[*input_at]->rest);
  return {std::move(thought), ToolCall{*tool, std::move(input)}};
}

std::string render_agent_output(std::string_view thought, const AgentAction& action) {
  std::string out(kThoughtMarker);
  out += " ";
  out += thought;
  out += "\n";
  if (const auto* fa = std::get_if<FinalAnswer>(&action)) {
    out += kFinalAnswerMarker;
    out += " " + fa->text;
  } else {
    const auto& call = std::get<ToolCall>(action);
    out += kActionMarker;
    out += " ";
    out += tool_display_name(call.tool);
    out += "\n";
    out += kActionInputMarker;
    out += " " + format_slot_line(call.input);
  }
  return out;
}

Branch decide_branch(std::string_view, const AgentAction& action) {
  return std::holds_alternative<FinalAnswer>(action) ? Branch::Answer : Branch::InvokeTool;
}

nlohmann::ordered_json to_json(const ObservationResult& obs) {
  nlohmann::ordered_json j;
  j["kind"] = obs.ok() ? "success" : "error_info";
  j["text"] = obs.text;
  if (!obs.error_code.empty()) j["code"] = obs.error_code;
  if (obs.payload) j["payload"] = *obs.payload;
  return j;
}

nlohmann::ordered_json to_json(const AgentAction& action) {
  nlohmann::ordered_json j;
  if (const auto* fa = std::get_if<FinalAnswer>(&action)) {
    j["variant"] = "final_answer";
    j["answer"] = fa->text;
  } else {
    const auto& call = std::get<ToolCall>(action);
    j["variant"] = "tool_call";
    j["tool"] = tool_display_name(call.tool);
    j["input"] = to_json(call.input);
  }
  return j;
}

nlohmann::ordered_json to_json(const QtaoTrace& trace) {
  nlohmann::ordered_json j;
  j["round_index"] = trace.round_index;
  j["question"] = trace.question;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : trace.steps) {
    nlohmann::ordered_json js;
    js["n"] = s.iteration;
    js["thought"] = s.thought;
    js["action"] = to_json(s.action);
    js["observation"] = s.observation ? to_json(*s.observation) : nlohmann::ordered_json(nullptr);
    steps.push_back(std::move(js));
  }
  j["steps"] = std::move(steps);
  j["answer"] = trace.answer ? nlohmann::ordered_json(*trace.answer) : nlohmann::ordered_json(nullptr);
  j["outcome"] = outcome_name(trace.outcome);
  return j;
}

QtaoTrace trace_from_json(const nlohmann::ordered_json& j) {
  QtaoTrace t;
  t.round_index = j.at("round_index").get<int>();
  t.question = j.at("question").get<std::string>();
  for (const auto& js : j.at("steps")) {
    QtaoStep s;
    s.iteration = js.at("n").get<int>();
    s.thought = js.at("thought").get<std::string>();
    const auto& ja = js.at("action");
    if (ja.at("variant") == "final_answer") {
      s.action = FinalAnswer{ja.at("answer").get<std::string>()};
    } else {
      auto tool = parse_tool_name(ja.at("tool").get<std::string>());
      if (!tool) throw std::runtime_error("unknown tool in trace record");
      s.action = ToolCall{*tool, slots_from_json(ja.at("input"))};
    }
    const auto& jo = js.at("observation");
    if (!jo.is_null()) {
      ObservationResult obs;
      obs.kind = jo.at("kind") == "success" ? ObservationKind::Success : ObservationKind::ErrorInfo;
      obs.text = jo.at("text").get<std::string>();
      if (jo.contains("code")) obs.error_code = jo.at("code").get<std::string>();
      if (jo.contains("payload")) obs.payload = jo.at("payload");
      s.observation = std::move(obs);
    }
    t.steps.push_back(std::move(s));
  }
  if (!j.at("answer").is_null()) t.answer = j.at("answer").get<std::string>();
  auto outcome = parse_outcome(j.at("outcome").get<std::string>());
  if (!outcome) throw std::runtime_error("unknown outcome in trace record");
  t.outcome = *outcome;
  return t;
}

std::string serialize_trace(const QtaoTrace& trace) { return to_json(trace).dump(); }

}  // namespace railagent
