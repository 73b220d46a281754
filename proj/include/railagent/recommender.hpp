#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "railagent/conversation.hpp"
#include "railagent/corpus.hpp"
#include "railagent/llm_backend.hpp"

namespace railagent {

struct PassengerProfile {
  std::string passenger_id;
  std::optional<std::string> gender;
  std::optional<int> age;
  std::optional<std::string> place_of_birth;

  /// Throws std::invalid_argument when age is outside 0..130.
  void validate() const;
  std::string describe() const;

  friend bool operator==(const PassengerProfile&, const PassengerProfile&) = default;
};

nlohmann::ordered_json to_json(const PassengerProfile& p);
PassengerProfile profile_from_json(const nlohmann::json& j);

struct RecTurn {
  Speaker speaker = Speaker::Passenger;
  std::string utterance;
  std::vector<std::string> mentioned_items;
};

std::vector<RecTurn> to_rec_turns(const ConversationHistory& history);

/// Task description (T) and format instruction (F). Both accept the
/// placeholders {k}, {profile}, {history}; F additionally {cuisines}.
struct RecPromptTemplate {
  std::string task_description;
  std::string format_instruction;

  static RecPromptTemplate standard();
  /// Throws std::invalid_argument if F does not name every feature field the
  /// aligner reads.
  void validate() const;
  std::string render(const PassengerProfile& profile, const std::vector<RecTurn>& history, int k,
                     const Legend& legend) const;
};

struct PreliminaryItem {
  std::string name;
  std::optional<PartialFeatures> claimed_features;
  friend bool operator==(const PreliminaryItem&, const PreliminaryItem&) = default;
};

struct ParsedRecommendations {
  std::vector<PreliminaryItem> items;
  std::vector<std::string> warnings;
};

/// Parses a numbered list "N. Name (key=value, ...)". Lines that do not parse
/// are dropped and reported as warnings; the result is truncated to k.
ParsedRecommendations parse_recommendation_list(std::string_view text, const Legend& legend, int k);
std::optional<PartialFeatures> parse_claimed_features(std::string_view tuple, const Legend& legend);

using BlockWeights = std::array<double, kFeatureBlockCount>;
inline constexpr BlockWeights kUniformWeights = {1, 1, 1, 1, 1, 1};

class LegendMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BlockRange {
  size_t offset;
  size_t size;
};

/// Weighted cosine restricted to the populated blocks:
///   sum_b w_b <a_b, c_b> / sqrt(sum_b w_b |a_b|^2 * sum_b w_b |c_b|^2)
/// clamped to [0, 1]; zero when either side has no mass.
double weighted_block_cosine(std::span<const double> a, std::span<const double> b,
                             std::span<const BlockRange> blocks, std::span<const bool> populated,
                             std::span<const double> weights);

double similarity(const PartialVector& a, const FeatureVector& b, const FeatureLayout& layout,
                  const BlockWeights& weights = kUniformWeights);
double similarity(const FeatureVector& a, const FeatureVector& b, const FeatureLayout& layout,
                  const BlockWeights& weights = kUniformWeights);

enum class MatchBasis { ExactName, Feature, LexicalFallback };
std::string_view basis_name(MatchBasis b);

struct AlignedRecommendation {
  PreliminaryItem source;
  const DishItem* matched = nullptr;
  double similarity_score = 0.0;
  MatchBasis match_basis = MatchBasis::ExactName;
};

struct AlignOptions {
  BlockWeights weights = kUniformWeights;
  /// Restrict feature/lexical matching to one city's dishes (when any exist).
  std::optional<std::string> city_filter;
};

struct ArgmaxResult {
  size_t index = 0;
  double score = -1.0;
};

/// Best corpus match by feature similarity; ties go to the lowest item_id.
/// `candidates` empty means the whole corpus. OpenMP-parallel over the
/// candidate set; *_serial is the single-threaded reference.
ArgmaxResult feature_argmax(const PartialVector& query, const Corpus& corpus,
                            const BlockWeights& weights, std::span<const size_t> candidates = {});
ArgmaxResult feature_argmax_serial(const PartialVector& query, const Corpus& corpus,
                                   const BlockWeights& weights,
                                   std::span<const size_t> candidates = {});
ArgmaxResult lexical_argmax(std::string_view name, const Corpus& corpus,
                            std::span<const size_t> candidates = {});
ArgmaxResult lexical_argmax_serial(std::string_view name, const Corpus& corpus,
                                   std::span<const size_t> candidates = {});

/// Maps every preliminary item onto a catalog member: exact name, then
/// feature argmax, then name-token overlap; deduplicated, truncated to k.
std::vector<AlignedRecommendation> align(std::span<const PreliminaryItem> preliminary,
                                         const Corpus& corpus, int k,
                                         const AlignOptions& options = {});
std::vector<AlignedRecommendation> align_serial(std::span<const PreliminaryItem> preliminary,
                                                const Corpus& corpus, int k,
                                                const AlignOptions& options = {});

nlohmann::ordered_json to_json(const AlignedRecommendation& r);

class EmptyRecommendation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RecommendationResult {
  std::vector<PreliminaryItem> preliminary;
  std::vector<AlignedRecommendation> aligned;
  std::vector<std::string> warnings;
};

/// Zero-shot conversational recommender followed by catalog alignment.
class Recommender {
 public:
  Recommender(const Corpus& corpus, LlmBackend& backend,
              RecPromptTemplate templ = RecPromptTemplate::standard(), AlignOptions options = {});

  /// Throws EmptyRecommendation when nothing parses after one re-prompt.
  ParsedRecommendations recommend_preliminary(const PassengerProfile& profile,
                                              const std::vector<RecTurn>& history, int k) const;
  RecommendationResult recommend(const PassengerProfile& profile,
                                 const std::vector<RecTurn>& history, int k) const;

  const Corpus& corpus() const { return corpus_; }

 private:
  const Corpus& corpus_;
  LlmBackend& backend_;
  RecPromptTemplate templ_;
  AlignOptions options_;
};

}  // namespace railagent
