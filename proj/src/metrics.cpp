#include "railagent/metrics.hpp"

#include <algorithm>

namespace railagent {

std::string_view cause_name(FailureCause c) {
  switch (c) {
    case FailureCause::Station: return "Station";
    case FailureCause::City: return "City";
    case FailureCause::Date: return "Date";
    case FailureCause::Time: return "Time";
    case FailureCause::Unclassifiable: return "Unclassifiable";
  }
  return "Unclassifiable";
}

std::optional<FailureCause> parse_cause(std::string_view s) {
  for (auto c : {FailureCause::Station, FailureCause::City, FailureCause::Date, FailureCause::Time,
                 FailureCause::Unclassifiable})
    if (cause_name(c) == s) return c;
  return std::nullopt;
}

double IterationDistribution::fraction(std::size_t bucket) const {
  return total == 0 ? 0.0 : static_cast<double>(counts.at(bucket)) / static_cast<double>(total);
}

std::size_t CauseDistribution::classified() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

double CauseDistribution::fraction(FailureCause c) const {
  auto n = classified();
  if (n == 0 || c == FailureCause::Unclassifiable) return 0.0;
  return static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(n);
}

double accuracy(std::span<const OutcomeRecord> records) {
  if (records.empty()) return 0.0;
  auto ok = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.success; });
  return static_cast<double>(ok) / static_cast<double>(records.size());
}

double mean_qtao(std::span<const OutcomeRecord> records, bool successes_only) {
  long long sum = 0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (successes_only && !r.success) continue;
    sum += r.qtao_iterations;
    ++n;
  }
  return n == 0 ? 0.0 : static_cast<double>(sum) / static_cast<double>(n);
}

IterationDistribution iteration_distribution(std::span<const OutcomeRecord> records) {
  IterationDistribution d;
  for (const auto& r : records) {
    if (!r.success) continue;
    auto bucket = static_cast<std::size_t>(std::clamp(r.qtao_iterations, 1, 4) - 1);
    ++d.counts[bucket];
    ++d.total;
  }
  return d;
}

CauseDistribution cause_distribution(std::span<const OutcomeRecord> records) {
  CauseDistribution d;
  for (const auto& r : records) {
    if (r.success) continue;
    auto c = r.failure_cause.value_or(FailureCause::Unclassifiable);
    if (c == FailureCause::Unclassifiable)
      ++d.unclassifiable;
    else
      ++d.counts[static_cast<std::size_t>(c)];
  }
  return d;
}

double prop_at_k(const std::vector<std::vector<std::string>>& lists, const Corpus& corpus, int k) {
  if (lists.empty() || k <= 0) return 0.0;
  double sum = 0.0;
  for (const auto& list : lists) {
    auto n = std::min<std::size_t>(list.size(), static_cast<std::size_t>(k));
    if (n == 0) continue;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (corpus.find_name(list[i])) ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(n);
  }
  return sum / static_cast<double>(lists.size());
}

double recall_at_k(std::span<const RankedSession> sessions, int k) {
  if (sessions.empty() || k <= 0) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : sessions) {
    auto n = std::min<std::size_t>(s.ranked_ids.size(), static_cast<std::size_t>(k));
    if (std::find(s.ranked_ids.begin(), s.ranked_ids.begin() + static_cast<std::ptrdiff_t>(n), s.ground_truth) !=
        s.ranked_ids.begin() + static_cast<std::ptrdiff_t>(n))
      ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(sessions.size());
}

}  // namespace railagent
