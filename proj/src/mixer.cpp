#include "sonify/mixer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "sonify/error.hpp"

namespace sonify {

void GainRange::validate() const {
  if (!(half_width >= 0.0) || !std::isfinite(center)) throw InvalidArgument("gain range needs half_width >= 0");
  if (center > -10.0) spdlog::warn("gain range center {} dB-LUFS is above -10; mixes will likely clip", center);
}

double sample_gain(Rng& rng, const GainRange& range) {
  if (!(range.half_width >= 0.0)) throw InvalidArgument("gain range needs half_width >= 0");
  const double u = rng.uniform01();
  return range.center - range.half_width + 2.0 * range.half_width * u;
}

MixResult mix(std::span<const AudioChunk> chunks, std::span<const double> gammas, const ChunkFormat& format) {
  if (chunks.empty()) throw InvalidArgument("mix needs at least one source");
  if (chunks.size() != gammas.size()) throw InvalidArgument("one gamma per source is required");
  const std::size_t len = chunks.front().samples.size();
  for (const auto& c : chunks) {
    if (c.samples.size() != len || c.sample_rate != chunks.front().sample_rate)
      throw InvalidArgument("mix sources differ in length or sample rate");
  }

  MixResult r;
  std::vector<double> sum(len, 0.0);
  std::size_t pad = chunks.front().pad_samples;
  for (std::size_t s = 0; s < chunks.size(); ++s) {
    const LufsValue loud = measure_integrated_lufs(chunks[s], format);
    if (loud.is_silence) throw InvalidArgument("silent source '" + chunks[s].id() + "' cannot be mixed");
    const GainResult gain = gain_to_target(loud, gammas[s]);
    const auto& x = chunks[s].samples;
    // Same per-sample arithmetic as normalize_to_lufs.
    for (std::size_t i = 0; i < len; ++i)
      sum[i] += static_cast<float>(static_cast<double>(x[i]) * gain.linear_scale);
    r.source_gains.push_back(gain);
    pad = std::min(pad, chunks[s].pad_samples);
  }

  double peak = 0.0;
  for (double v : sum) peak = std::max(peak, std::abs(v));
  r.pre_clip_peak = peak;
  double scale = 1.0;
  if (peak > 1.0) {
    scale = kClipTargetPeak / peak;
    r.clip_applied = true;
    r.peak_gain_db = 20.0 * std::log10(scale);
  }

  r.audio.sample_rate = chunks.front().sample_rate;
  r.audio.pad_samples = pad;
  r.audio.samples.resize(len);
  for (std::size_t i = 0; i < len; ++i)
    r.audio.samples[i] = static_cast<float>(r.clip_applied ? sum[i] * scale : sum[i]);
  return r;
}

RenderedPair render_pair(const std::string& image_id, std::span<const MatchResult> matches, const ChunkStore& store,
                         Rng& rng, const MixerConfig& cfg) {
  if (matches.empty()) throw InvalidArgument("image '" + image_id + "' has no matches to render");
  if (matches.size() > cfg.max_sources)
    throw InvalidArgument("image '" + image_id + "' has " + std::to_string(matches.size()) +
                          " matches, more than max_sources");
  cfg.range.validate();

  std::vector<AudioChunk> chunks;
  std::vector<double> gammas;
  RenderedPair out;
  out.recipe.image_id = image_id;
  for (std::size_t m = 0; m < matches.size(); ++m) {
    const double gamma = sample_gain(rng, cfg.range);
    AudioChunk ch = store.load(matches[m].chunk_id);
    if (measure_integrated_lufs(ch, cfg.format).is_silence) {
      spdlog::warn("image '{}': dropping silent source '{}'", image_id, matches[m].chunk_id);
      continue;
    }
    out.recipe.entries.push_back({matches[m].chunk_id, gamma, matches[m].raw_score, matches[m].ssr_score});
    out.used_matches.push_back(m);
    chunks.push_back(std::move(ch));
    gammas.push_back(gamma);
  }
  if (chunks.empty()) throw InvalidArgument("image '" + image_id + "': all sources are silent");

  MixResult mixed = mix(chunks, gammas, cfg.format);
  out.recipe.clip_policy_applied = mixed.clip_applied;
  out.recipe.peak_gain_db = mixed.peak_gain_db;
  out.audio = std::move(mixed.audio);
  out.audio.source_id = image_id;
  return out;
}

AudioChunk replay_recipe(const MixRecipe& recipe, const ChunkStore& store, const ChunkFormat& format) {
  if (recipe.entries.empty()) throw InvalidArgument("recipe for '" + recipe.image_id + "' has no entries");
  std::vector<AudioChunk> chunks;
  std::vector<double> gammas;
  for (const auto& e : recipe.entries) {
    chunks.push_back(store.load(e.chunk_id));
    gammas.push_back(e.gamma_db);
  }
  MixResult mixed = mix(chunks, gammas, format);
  mixed.audio.source_id = recipe.image_id;
  return std::move(mixed.audio);
}

}  // namespace sonify
