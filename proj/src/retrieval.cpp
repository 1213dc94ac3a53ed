#include "sonify/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "sonify/error.hpp"

namespace sonify {

TiePolicy parse_tie_policy(const std::string& name) {
  if (name == "inclusive") return TiePolicy::inclusive;
  if (name == "strict") return TiePolicy::strict;
  throw InvalidArgument("unknown tie policy '" + name + "' (expected inclusive or strict)");
}

const char* to_string(TiePolicy p) { return p == TiePolicy::strict ? "strict" : "inclusive"; }

void RetrievalConfig::validate() const {
  if (top_k < 1) throw InvalidArgument("top_k must be >= 1");
}

double ssr(double t) { return std::copysign(std::sqrt(std::abs(t)), t); }

ScoreVector ssr(const ScoreVector& scores) {
  ScoreVector out;
  out.query_id = scores.query_id;
  out.scores.resize(scores.scores.size());
  std::transform(scores.scores.begin(), scores.scores.end(), out.scores.begin(), [](double t) { return ssr(t); });
  return out;
}

double dynamic_threshold(std::span<const double> ssr_scores, std::size_t k) {
  if (ssr_scores.empty()) throw InvalidArgument("empty pool");
  if (k == 0) throw InvalidArgument("top_k must be >= 1");
  const std::size_t n = std::min(k, ssr_scores.size());
  std::vector<double> top(ssr_scores.begin(), ssr_scores.end());
  std::partial_sort(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(n), top.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += top[i];
  return sum / static_cast<double>(n);
}

std::vector<std::size_t> eligible_set(std::span<const double> ssr_scores, double lb, TiePolicy policy) {
  if (!std::isfinite(lb)) throw InvalidArgument("threshold must be finite");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ssr_scores.size(); ++i) {
    const double t = ssr_scores[i];
    if (policy == TiePolicy::strict ? t > lb : t >= lb - kInclusiveEpsilon) idx.push_back(i);
  }
  if (idx.empty() && policy == TiePolicy::strict) throw DegenerateTieError();
  return idx;
}

MatchResult match_from_scores(const std::string& concept_id, const ScoreVector& raw, const EmbeddingMatrix& pool,
                              const RetrievalConfig& cfg, Rng& rng) {
  cfg.validate();
  if (raw.scores.size() != pool.rows()) throw InvalidArgument("score vector does not match pool size");
  const ScoreVector t = ssr(raw);
  const double lb = dynamic_threshold(t.scores, cfg.top_k);
  const auto eligible = eligible_set(t.scores, lb, cfg.tie_policy);
  if (eligible.empty()) throw DegenerateTieError();
  const std::size_t pick = eligible[rng.below(eligible.size())];

  MatchResult m;
  m.concept_id = concept_id;
  m.chunk_id = pool.id(pick);
  m.chunk_row = pick;
  m.raw_score = raw.scores[pick];
  m.ssr_score = t.scores[pick];
  m.threshold_lb = lb;
  m.eligible_count = eligible.size();
  return m;
}

MatchResult get_matched_audio(const SoundingConcept& sounding, std::span<const float> text_embedding,
                              const EmbeddingMatrix& pool, const RetrievalConfig& cfg, Rng& rng, Execution exec) {
  ScoreVector raw = cosine_sim(text_embedding, pool, exec);
  raw.query_id = sounding.concept_id;
  return match_from_scores(sounding.concept_id, raw, pool, cfg, rng);
}

std::uint64_t concept_seed(std::uint64_t master_seed, std::size_t ordinal) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(ordinal));
}

std::vector<RetrievalOutcome> batch_retrieve(std::span<const SoundingConcept> concepts,
                                             const EmbeddingMatrix& text_embeddings, const EmbeddingMatrix& pool,
                                             const RetrievalConfig& cfg, Execution exec) {
  cfg.validate();
  std::vector<RetrievalOutcome> out(concepts.size());
  const auto n = static_cast<std::int64_t>(concepts.size());
#pragma omp parallel for schedule(dynamic) if (exec == Execution::parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const auto& c = concepts[idx];
    auto& o = out[idx];
    o.ordinal = idx;
    o.concept_id = c.concept_id;
    try {
      const auto row = text_embeddings.find(c.concept_id);
      if (!row) throw InvalidArgument("no text embedding for concept '" + c.concept_id + "'");
      Rng rng(concept_seed(cfg.seed, idx));
      o.match = get_matched_audio(c, text_embeddings.row(*row), pool, cfg, rng, Execution::sequential);
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  }
  return out;
}

}  // namespace sonify
