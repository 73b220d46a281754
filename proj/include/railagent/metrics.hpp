#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "railagent/corpus.hpp"

namespace railagent {

enum class FailureCause { Station, City, Date, Time, Unclassifiable };
inline constexpr std::array<FailureCause, 4> kTableCauses = {FailureCause::Station, FailureCause::City,
                                                             FailureCause::Date, FailureCause::Time};
std::string_view cause_name(FailureCause c);
std::optional<FailureCause> parse_cause(std::string_view s);

struct OutcomeRecord {
  bool success = false;
  int qtao_iterations = 0;
  std::optional<FailureCause> failure_cause;  // failures only; nullopt counts as Unclassifiable
};

/// Buckets 1, 2, 3 and >3 iterations over the successful records.
struct IterationDistribution {
  std::array<std::size_t, 4> counts{};
  std::size_t total = 0;
  double fraction(std::size_t bucket) const;
};

/// Station/City/Date/Time counts over classified failures; unclassifiable
/// failures are kept apart and excluded from the fractions.
struct CauseDistribution {
  std::array<std::size_t, 4> counts{};
  std::size_t unclassifiable = 0;
  std::size_t classified() const;
  double fraction(FailureCause c) const;
};

double accuracy(std::span<const OutcomeRecord> records);
double mean_qtao(std::span<const OutcomeRecord> records, bool successes_only);
IterationDistribution iteration_distribution(std::span<const OutcomeRecord> records);
CauseDistribution cause_distribution(std::span<const OutcomeRecord> records);

/// Mean over lists of the share of the first min(k, size) names that are
/// catalog members (normalized exact match). An empty list contributes 0.
double prop_at_k(const std::vector<std::vector<std::string>>& lists, const Corpus& corpus, int k);

struct RankedSession {
  std::vector<std::string> ranked_ids;  // "" marks a rank with no catalog item
  std::string ground_truth;
};
double recall_at_k(std::span<const RankedSession> sessions, int k);

}  // namespace railagent
