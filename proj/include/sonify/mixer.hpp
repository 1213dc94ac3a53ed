#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sonify/audio.hpp"
#include "sonify/loudness.hpp"
#include "sonify/pool.hpp"
#include "sonify/retrieval.hpp"
#include "sonify/rng.hpp"

namespace sonify {

/// Uniform dB-LUFS range [center - half_width, center + half_width].
struct GainRange {
  double center = -23.0;
  double half_width = 1.0;

  /// Throws for a negative half width; warns when center > -10.
  void validate() const;
  bool contains(double gamma) const { return gamma >= center - half_width && gamma <= center + half_width; }
};

struct MixerConfig {
  GainRange range;
  std::size_t max_sources = 3;
  ChunkFormat format;
};

double sample_gain(Rng& rng, const GainRange& range);

/// Mixes above unit peak are rescaled to this peak.
inline constexpr double kClipTargetPeak = 0.99;

struct MixResult {
  AudioChunk audio;
  std::vector<GainResult> source_gains;
  double pre_clip_peak = 0.0;
  bool clip_applied = false;
  double peak_gain_db = 0.0;
};

/// Normalizes every source to its gamma and sums them sample-wise in the
/// given order. If the sum leaves [-1, 1] the whole mix is scaled by
/// 0.99 / peak. Throws on length/rate mismatch or a silent source.
MixResult mix(std::span<const AudioChunk> chunks, std::span<const double> gammas, const ChunkFormat& format = {});

struct RecipeEntry {
  std::string chunk_id;
  double gamma_db = 0.0;
  double raw_score = 0.0;
  double ssr_score = 0.0;

  bool operator==(const RecipeEntry&) const = default;
};

/// Everything needed to rebuild an image's waveform from the chunk files.
struct MixRecipe {
  std::string image_id;
  std::vector<RecipeEntry> entries;
  bool clip_policy_applied = false;
  double peak_gain_db = 0.0;

  bool operator==(const MixRecipe&) const = default;
};

struct RenderedPair {
  MixRecipe recipe;
  AudioChunk audio;
  std::vector<std::size_t> used_matches;  // indices into the input matches
};

/// Samples one gamma per match (in match order) and mixes the resolved
/// chunks. Silent sources are dropped; throws when none remain, when a chunk
/// id cannot be resolved, or when there are more matches than max_sources.
RenderedPair render_pair(const std::string& image_id, std::span<const MatchResult> matches, const ChunkStore& store,
                         Rng& rng, const MixerConfig& cfg = {});

/// Rebuilds the waveform of a stored recipe.
AudioChunk replay_recipe(const MixRecipe& recipe, const ChunkStore& store, const ChunkFormat& format = {});

}  // namespace sonify
