#include "railagent/conversation.hpp"

namespace railagent {

std::string render_history(const ConversationHistory& history) {
  std::string out;
  for (const auto& u : history) {
    out += u.speaker == Speaker::Passenger ? "Passenger: " : "Agent: ";
    out += u.text;
    out += "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

}  // namespace railagent
