#pragma once

#include <string>
#include <vector>

namespace railagent {

enum class Speaker { Passenger, Agent };

struct Utterance {
  Speaker speaker = Speaker::Passenger;
  std::string text;
  friend bool operator==(const Utterance&, const Utterance&) = default;
};

/// Multi-round dialogue seen by tools: earlier questions and answers plus
/// the current question as the last passenger utterance.
using ConversationHistory = std::vector<Utterance>;

std::string render_history(const ConversationHistory& history);

}  // namespace railagent
