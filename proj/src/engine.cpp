#include "railagent/engine.hpp"

#include <algorithm>

#include "railagent/text.hpp"

namespace railagent {

void ToolRegistry::register_tool(ToolContract tool) {
  if (!tool.invoke) throw std::invalid_argument("tool without an invoke function");
  auto name = tool.name;
  tools_[name] = std::move(tool);
}

const ToolContract* ToolRegistry::find(ToolName name) const {
  auto it = tools_.find(name);
  return it == tools_.end() ? nullptr : &it->second;
}

std::vector<BasePrompt::ToolDescription> ToolRegistry::descriptions() const {
  std::vector<BasePrompt::ToolDescription> out;
  for (const auto& [name, tool] : tools_) out.emplace_back(tool_display_name(name), tool.description);
  return out;
}

ObservationResult ToolRegistry::invoke(ToolName name, const SlotMap& slots, const ToolContext& ctx) const {
  const auto* tool = find(name);
  if (!tool)
    return ObservationResult::error(errc::kToolException,
                                    "Error: tool " + std::string(tool_display_name(name)) + " is not available");
  try {
    return tool->invoke(slots, ctx);
  } catch (const std::exception& e) {
    return ObservationResult::error(errc::kToolException,
                                    "Error: " + std::string(tool_display_name(name)) + " failed: " + e.what());
  }
}

void QtaoConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("qtao.max_iterations must be >= 1");
  if (repair_reprompts < 0) throw std::invalid_argument("qtao.repair_reprompts must be >= 0");
}

ConversationHistory SessionState::conversation(std::string_view current) const {
  ConversationHistory out;
  for (const auto& t : history) {
    out.push_back({Speaker::Passenger, t.question});
    if (t.answer) out.push_back({Speaker::Agent, *t.answer});
  }
  if (!current.empty()) out.push_back({Speaker::Passenger, std::string(current)});
  return out;
}

namespace {

const std::map<ToolName, std::vector<std::string>>& optional_slots() {
  static const std::map<ToolName, std::vector<std::string>> m = {
      {ToolName::Ticketing, {"time"}},
      {ToolName::Weather, {}},
      {ToolName::FoodDrink, {"query"}},
      {ToolName::ChitChat, {}},
  };
  return m;
}

}  // namespace

SlotExtractionFailed::SlotExtractionFailed(std::vector<std::string> missing)
    : std::runtime_error("missing required parameter(s): " + join(missing)), missing_(std::move(missing)) {}

std::string_view default_base_preamble() {
  return "You are RailAgent, a railway passenger service assistant. Use the following tools to give "
         "the most accurate and helpful answer:\n"
         "{tools}\n"
         "Work in Question-Thought-Action-Observation steps:\n"
         "Question: the passenger's question\n"
         "Thought: reason about what to do next\n"
         "Action: the tool to use, one of [F&D Recommendation, Ticketing, Weather, ChitChat]\n"
         "Action Input: the tool parameters as comma-separated key=value pairs\n"
         "Observation: the tool result\n"
         "... (Thought/Action/Action Input/Observation may repeat)\n"
         "When the observations contain enough information, finish with:\n"
         "Thought: I can answer now\n"
         "Final Answer: the answer to the passenger";
}

std::string_view format_reminder() {
  return "Reminder: reply in exactly this format, either\n"
         "Thought: <reasoning>\nAction: <F&D Recommendation|Ticketing|Weather|ChitChat>\n"
         "Action Input: <key=value, ...>\nor\nThought: <reasoning>\nFinal Answer: <answer>";
}

QtaoEngine::QtaoEngine(std::string_view base_preamble, ToolRegistry tools, LlmBackend& backend,
                       QtaoConfig config)
    : base_(base_preamble, tools.descriptions()),
      tools_(std::move(tools)),
      backend_(backend),
      config_(config) {
  config_.validate();
}

std::vector<std::string> QtaoEngine::missing_slots(ToolName tool, const SlotMap& slots) const {
  std::vector<std::string> missing;
  if (const auto* t = tools_.find(tool))
    for (const auto& s : t->required_slots) {
      auto v = slots.get(s);
      if (!v || trim(*v).empty()) missing.push_back(s);
    }
  return missing;
}

SlotMap QtaoEngine::extract_action_input(const ConversationHistory& history, ToolName tool,
                                         const SlotMap& known) const {
  if (history.empty()) throw std::invalid_argument("slot extraction needs a non-empty history");
  const auto* contract = tools_.find(tool);
  if (!contract) throw std::invalid_argument("tool not registered: " + std::string(tool_display_name(tool)));

  std::string prompt = "Extract the input parameters for the " + std::string(tool_display_name(tool)) +
                       " tool from the conversation below.\nRequired parameters: " +
                       join(contract->required_slots) + "\n";
  if (!optional_slots().at(tool).empty()) prompt += "Optional parameters: " + join(optional_slots().at(tool)) + "\n";
  prompt += "Reply with one line of comma-separated key=value pairs using the passenger's own words.\n\n"
            "Conversation:\n" + render_history(history) + "\n\nParameters:";

  SlotMap merged = known;
  auto absorb = [&](const std::string& completion) {
    std::string line;
    for (const auto& l : split_lines(completion)) {
      auto t = trim(l);
      if (starts_with_ci(t, kActionInputMarker)) t = trim(std::string_view(t).substr(kActionInputMarker.size()));
      if (t.empty()) continue;
      line += (line.empty() ? "" : ", ") + t;
    }
    const auto parsed = parse_slot_line(line);
    for (const auto& [k, v] : parsed.entries())
      if (!trim(v).empty() && (!merged.has(k) || trim(*merged.get(k)).empty())) merged.set(k, v);
  };

  absorb(backend_.complete(prompt, {}));
  auto missing = missing_slots(tool, merged);
  if (missing.empty()) return merged;
  absorb(backend_.complete(prompt + "\nReminder: still missing " + join(missing) +
                               ". Reply with key=value pairs only.",
                           {}));
  missing = missing_slots(tool, merged);
  if (!missing.empty()) throw SlotExtractionFailed(std::move(missing));
  return merged;
}

QtaoTrace QtaoEngine::run_round(SessionState& session, std::string_view question,
                                std::optional<int> budget) const {
  const int n_max = budget.value_or(session.max_iterations.value_or(config_.max_iterations));
  if (n_max < 1) throw std::invalid_argument("iteration budget must be >= 1");
  const bool error_info = session.error_info.value_or(config_.error_info_enabled);

  QtaoTrace trace;
  trace.round_index = static_cast<int>(session.history.size()) + 1;
  trace.question = std::string(question);
  trace.outcome = RoundOutcome::BudgetExhausted;

  auto prior = render_history(session.conversation());
  auto base = prior.empty() ? base_ : base_.with_context("Conversation so far:\n" + prior);
  auto history = session.conversation(question);
  const std::vector<std::string> stop = {std::string(kObservationMarker)};

  for (int n = 1; n <= n_max; ++n) {
    auto prompt = build_prompt(base, question, trace.steps);
    std::optional<ParsedOutput> parsed;
    auto raw = backend_.complete(prompt, stop);
    for (int attempt = 0;; ++attempt) {
      try {
        parsed = parse_agent_output(raw);
        break;
      } catch (const AgentParseError&) {
        if (attempt >= config_.repair_reprompts) break;
        raw = backend_.complete(prompt + "\n\n" + std::string(format_reminder()), stop);
      }
    }
    if (!parsed) {
      trace.outcome = RoundOutcome::ParseFailed;
      break;
    }

    QtaoStep step{n, std::move(parsed->thought), std::move(parsed->action), std::nullopt};
    if (decide_branch(step.thought, step.action) == Branch::Answer) {
      trace.answer = std::get<FinalAnswer>(step.action).text;
      trace.outcome = RoundOutcome::Answered;
      trace.steps.push_back(std::move(step));
      break;
    }

    auto& call = std::get<ToolCall>(step.action);
    if (!missing_slots(call.tool, call.input).empty()) {
      try {
        call.input = extract_action_input(history, call.tool, call.input);
      } catch (const SlotExtractionFailed& e) {
        nlohmann::ordered_json payload;
        payload["missing"] = e.missing();
        auto text = error_info ? "Error: missing required parameter(s) for " +
                                     std::string(tool_display_name(call.tool)) + ": " + join(e.missing()) +
                                     ". Ask the passenger for them or infer them from the conversation."
                               : std::string("Error: tool call failed.");
        step.observation = ObservationResult::error(errc::kSlotExtractionFailed, std::move(text), std::move(payload));
      }
    }
    if (!step.observation)
      step.observation = tools_.invoke(call.tool, call.input, ToolContext{history, error_info, &session.profile});
    trace.steps.push_back(std::move(step));
  }

  auto record = serialize_trace(trace);
  session.history.push_back(trace);
  session.trace_records.push_back(record);
  if (sink_) sink_(record);
  return trace;
}

std::string chitchat(const ConversationHistory& history, LlmBackend& backend) {
  bool has_user = std::any_of(history.begin(), history.end(), [](const Utterance& u) {
    return u.speaker == Speaker::Passenger && !trim(u.text).empty();
  });
  if (!has_user) throw std::invalid_argument("no user utterance");
  auto prompt = "You are a friendly railway travel companion. Continue the conversation naturally and "
                "reply to the passenger's last message.\n\n" +
                render_history(history) + "\nAgent:";
  return backend.complete(prompt, {});
}

}  // namespace railagent
