#include "railagent/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "railagent/text.hpp"

namespace railagent {

namespace {

std::string spice_phrase(const SpicinessFlags& s) {
  static const char* words[] = {"not spicy at all", "mildly spicy", "medium spicy", "very spicy",
                                "extra spicy"};
  std::vector<std::string> on;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i]) on.emplace_back(words[i]);
  if (on.empty()) return {};
  if (on.size() == 1) return "I'd like it " + on[0] + ".";
  return "Anything from " + on.front() + " to " + on.back() + " is fine for me.";
}

std::string meal_phrase(const MealFlags& m) {
  std::vector<std::string> on;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i]) on.emplace_back(kMealFlags[i]);
  if (on.empty()) return {};
  std::string s = "It's for ";
  for (std::size_t i = 0; i < on.size(); ++i) s += (i == 0 ? "" : (i + 1 == on.size() ? " or " : ", ")) + on[i];
  return s + ".";
}

}  // namespace

UserSimulator::UserSimulator(const DishItem& target, const Legend& legend, std::uint64_t seed, int turn_budget)
    : target_(target), budget_(turn_budget) {
  if (turn_budget < 1 || turn_budget > 5) throw std::invalid_argument("turn budget must be in 1..5");

  std::vector<std::string> facts;
  if (auto it = legend.type_of_food.find(target.type_of_food); it != legend.type_of_food.end())
    facts.push_back("I feel like " + it->second + " food.");
  if (auto it = legend.cuisine.find(target.cuisine); it != legend.cuisine.end())
    facts.push_back("Preferably " + it->second + " cuisine.");
  if (auto m = meal_phrase(target.meal_suitability); !m.empty()) facts.push_back(m);
  if (auto s = spice_phrase(target.spiciness); !s.empty()) facts.push_back(s);
  facts.push_back(target.child_friendly ? "I'm travelling with a child, so it should suit kids."
                                        : "It's just for me, no kids.");
  auto budget = static_cast<long>(std::ceil(target.price / 10.0) * 10.0);
  facts.push_back("My budget is up to " + std::to_string(budget) + " yuan.");

  // Fisher-Yates over raw engine output keeps the order identical across
  // standard library implementations.
  std::mt19937_64 rng(seed);
  for (std::size_t i = facts.size(); i > 1; --i) std::swap(facts[i - 1], facts[rng() % i]);
  facts_ = std::move(facts);
}

std::optional<std::string> UserSimulator::next_utterance(const std::vector<RecTurn>&) {
  if (turn_ >= budget_) return std::nullopt;
  const auto per_turn = (facts_.size() + static_cast<std::size_t>(budget_) - 1) / static_cast<std::size_t>(budget_);
  const auto begin = std::min(facts_.size(), per_turn * static_cast<std::size_t>(turn_));
  const auto end = std::min(facts_.size(), begin + per_turn);
  std::string u = turn_ == 0 ? "Hi, can you recommend something to eat on the train?"
                             : "Not quite what I'm after.";
  for (auto i = begin; i < end; ++i) u += " " + facts_[i];
  ++turn_;
  if ((" " + normalize_name(u) + " ").find(" " + normalize_name(target_.name) + " ") != std::string::npos)
    throw std::logic_error("simulator utterance leaks the target name");
  return u;
}

bool UserSimulator::accepts(std::span<const std::string> ranked_ids, int k) const {
  auto n = std::min<std::size_t>(ranked_ids.size(), static_cast<std::size_t>(std::max(k, 0)));
  return std::find(ranked_ids.begin(), ranked_ids.begin() + static_cast<std::ptrdiff_t>(n), target_.item_id) !=
         ranked_ids.begin() + static_cast<std::ptrdiff_t>(n);
}

}  // namespace railagent
