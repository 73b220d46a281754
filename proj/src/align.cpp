#include <cmath>
#include <set>

#include "railagent/recommender.hpp"
#include "railagent/text.hpp"

namespace railagent {

namespace {

// Below this many candidates the thread fork costs more than the scan.
constexpr size_t kParallelThreshold = 512;
// Scores closer than this are ties; equal cosines can round differently.
constexpr double kTieEpsilon = 1e-12;

bool better(const ArgmaxResult& a, const ArgmaxResult& b, const Corpus& corpus) {
  if (std::abs(a.score - b.score) > kTieEpsilon) return a.score > b.score;
  return corpus.items()[a.index].item_id < corpus.items()[b.index].item_id;
}

template <typename Score>
ArgmaxResult argmax_serial(const Corpus& corpus, std::span<const size_t> candidates, Score score) {
  const size_t n = candidates.empty() ? corpus.size() : candidates.size();
  ArgmaxResult best;
  bool have = false;
  for (size_t i = 0; i < n; ++i) {
    size_t idx = candidates.empty() ? i : candidates[i];
    ArgmaxResult cur{idx, score(idx)};
    if (!have || better(cur, best, corpus)) {
      best = cur;
      have = true;
    }
  }
  return best;
}

template <typename Score>
ArgmaxResult argmax_parallel(const Corpus& corpus, std::span<const size_t> candidates, Score score) {
  const size_t n = candidates.empty() ? corpus.size() : candidates.size();
  if (n < kParallelThreshold) return argmax_serial(corpus, candidates, score);
  ArgmaxResult best;
  bool have = false;
#pragma omp parallel
  {
    ArgmaxResult local;
    bool local_have = false;
#pragma omp for schedule(static) nowait
    for (size_t i = 0; i < n; ++i) {
      size_t idx = candidates.empty() ? i : candidates[i];
      ArgmaxResult cur{idx, score(idx)};
      if (!local_have || better(cur, local, corpus)) {
        local = cur;
        local_have = true;
      }
    }
#pragma omp critical(railagent_argmax_merge)
    if (local_have && (!have || better(local, best, corpus))) {
      best = local;
      have = true;
    }
  }
  return best;
}

std::vector<size_t> city_candidates(const Corpus& corpus, const std::optional<std::string>& city) {
  std::vector<size_t> out;
  if (!city) return out;
  auto want = normalize_name(*city);
  for (size_t i = 0; i < corpus.size(); ++i)
    if (normalize_name(corpus.items()[i].city) == want) out.push_back(i);
  return out;
}

template <bool Parallel>
std::vector<AlignedRecommendation> align_impl(std::span<const PreliminaryItem> preliminary,
                                              const Corpus& corpus, int k,
                                              const AlignOptions& options) {
  if (corpus.size() == 0) throw std::invalid_argument("cannot align against an empty corpus");
  auto candidates = city_candidates(corpus, options.city_filter);
  std::vector<AlignedRecommendation> out;
  std::set<std::string> seen;
  for (const auto& item : preliminary) {
    if (static_cast<int>(out.size()) >= k) break;
    AlignedRecommendation rec{item, nullptr, 0.0, MatchBasis::ExactName};
    if (auto idx = corpus.index_of_name(item.name)) {
      rec.matched = &corpus.items()[*idx];
      rec.similarity_score = 1.0;
    } else if (item.claimed_features && item.claimed_features->any()) {
      auto query = encode_partial(*item.claimed_features, corpus.layout());
      auto best = Parallel ? feature_argmax(query, corpus, options.weights, candidates)
                           : feature_argmax_serial(query, corpus, options.weights, candidates);
      rec.matched = &corpus.items()[best.index];
      rec.similarity_score = best.score;
      rec.match_basis = MatchBasis::Feature;
    } else {
      auto best = Parallel ? lexical_argmax(item.name, corpus, candidates)
                           : lexical_argmax_serial(item.name, corpus, candidates);
      rec.matched = &corpus.items()[best.index];
      rec.similarity_score = best.score;
      rec.match_basis = MatchBasis::LexicalFallback;
    }
    if (seen.insert(rec.matched->item_id).second) out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

ArgmaxResult feature_argmax(const PartialVector& query, const Corpus& corpus,
                            const BlockWeights& weights, std::span<const size_t> candidates) {
  return argmax_parallel(corpus, candidates, [&](size_t i) {
    return similarity(query, corpus.vectors()[i], corpus.layout(), weights);
  });
}

ArgmaxResult feature_argmax_serial(const PartialVector& query, const Corpus& corpus,
                                   const BlockWeights& weights, std::span<const size_t> candidates) {
  return argmax_serial(corpus, candidates, [&](size_t i) {
    return similarity(query, corpus.vectors()[i], corpus.layout(), weights);
  });
}

ArgmaxResult lexical_argmax(std::string_view name, const Corpus& corpus,
                            std::span<const size_t> candidates) {
  return argmax_parallel(corpus, candidates,
                         [&](size_t i) { return token_overlap(name, corpus.items()[i].name); });
}

ArgmaxResult lexical_argmax_serial(std::string_view name, const Corpus& corpus,
                                   std::span<const size_t> candidates) {
  return argmax_serial(corpus, candidates,
                       [&](size_t i) { return token_overlap(name, corpus.items()[i].name); });
}

std::vector<AlignedRecommendation> align(std::span<const PreliminaryItem> preliminary,
                                         const Corpus& corpus, int k, const AlignOptions& options) {
  return align_impl<true>(preliminary, corpus, k, options);
}

std::vector<AlignedRecommendation> align_serial(std::span<const PreliminaryItem> preliminary,
                                                const Corpus& corpus, int k,
                                                const AlignOptions& options) {
  return align_impl<false>(preliminary, corpus, k, options);
}

}  // namespace railagent
