#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sonify/concepts.hpp"
#include "sonify/embed_store.hpp"
#include "sonify/rng.hpp"

namespace sonify {

enum class TiePolicy {
  inclusive,  // t >= lb - kInclusiveEpsilon; never empty on a non-empty pool
  strict,     // t > lb
};

inline constexpr double kInclusiveEpsilon = 1e-9;

TiePolicy parse_tie_policy(const std::string& name);
const char* to_string(TiePolicy p);

struct RetrievalConfig {
  std::size_t top_k = 50;
  TiePolicy tie_policy = TiePolicy::inclusive;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MatchResult {
  std::string concept_id;
  std::string chunk_id;
  std::size_t chunk_row = 0;
  double raw_score = 0.0;
  double ssr_score = 0.0;
  double threshold_lb = 0.0;
  std::size_t eligible_count = 0;

  bool operator==(const MatchResult&) const = default;
};

/// Signed square root, sign(t) * sqrt(|t|).
double ssr(double t);
ScoreVector ssr(const ScoreVector& scores);

/// Mean of the k largest scores (all scores when k exceeds the pool).
/// Summed in descending order. Throws InvalidArgument for an empty pool or k == 0.
double dynamic_threshold(std::span<const double> ssr_scores, std::size_t k);

/// Indices passing the threshold, ascending. Strict mode throws
/// DegenerateTieError when nothing passes.
std::vector<std::size_t> eligible_set(std::span<const double> ssr_scores, double lb, TiePolicy policy);

/// SSR -> threshold -> eligible set -> uniform choice, starting from raw
/// cosine scores against `pool`.
MatchResult match_from_scores(const std::string& concept_id, const ScoreVector& raw, const EmbeddingMatrix& pool,
                              const RetrievalConfig& cfg, Rng& rng);

/// Retrieves one pool chunk for a sounding concept.
MatchResult get_matched_audio(const SoundingConcept& sounding, std::span<const float> text_embedding,
                              const EmbeddingMatrix& pool, const RetrievalConfig& cfg, Rng& rng,
                              Execution exec = Execution::parallel);

struct RetrievalOutcome {
  std::size_t ordinal = 0;
  std::string concept_id;
  std::optional<MatchResult> match;
  std::string error;

  bool ok() const { return match.has_value(); }
  bool operator==(const RetrievalOutcome&) const = default;
};

/// Rng seed of the concept at `ordinal` within a batch.
std::uint64_t concept_seed(std::uint64_t master_seed, std::size_t ordinal);

/// Retrieval for every concept. Text embeddings are looked up by concept_id.
/// Each concept draws from its own stream (concept_seed), so the output does
/// not depend on the execution mode. Per-concept failures are reported in
/// the outcome and never abort the batch.
std::vector<RetrievalOutcome> batch_retrieve(std::span<const SoundingConcept> concepts,
                                             const EmbeddingMatrix& text_embeddings, const EmbeddingMatrix& pool,
                                             const RetrievalConfig& cfg, Execution exec = Execution::parallel);

}  // namespace sonify
