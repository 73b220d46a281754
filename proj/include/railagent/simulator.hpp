#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "railagent/corpus.hpp"
#include "railagent/recommender.hpp"

namespace railagent {

/// Rule-based passenger persona for recommendation evaluation. It reveals
/// feature-level preferences of a hidden target dish, a few per turn, and
/// never says the dish name. Output depends only on (target, seed, budget).
class UserSimulator {
 public:
  UserSimulator(const DishItem& target, const Legend& legend, std::uint64_t seed, int turn_budget = 3);

  /// Next passenger utterance, or nullopt once the turn budget is spent.
  std::optional<std::string> next_utterance(const std::vector<RecTurn>& history);
  bool accepts(std::span<const std::string> ranked_ids, int k) const;

  int turns_taken() const { return turn_; }
  const std::vector<std::string>& preference_statements() const { return facts_; }

 private:
  const DishItem& target_;
  int budget_;
  int turn_ = 0;
  std::vector<std::string> facts_;
};

}  // namespace railagent
