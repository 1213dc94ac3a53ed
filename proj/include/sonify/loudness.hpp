#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <utility>

#include "sonify/audio.hpp"

namespace sonify {

/// Integrated loudness in dB-LUFS. Silence is -inf with the flag set and
/// must never enter gain arithmetic.
struct LufsValue {
  double value = -std::numeric_limits<double>::infinity();
  bool is_silence = true;

  static LufsValue silence() { return {}; }
  static LufsValue of(double lufs) { return {lufs, false}; }
};

struct GainResult {
  double gain_db = 0.0;
  double linear_scale = 1.0;

  static GainResult from_db(double gain_db) { return {gain_db, std::pow(10.0, gain_db / 20.0)}; }
};

/// BS.1770-4 gating parameters.
inline constexpr double kBlockSeconds = 0.4;
inline constexpr double kHopSeconds = 0.1;
inline constexpr double kAbsoluteGateLufs = -70.0;
inline constexpr double kRelativeGateLu = -10.0;

/// Integrated loudness of a mono signal at any rate: K-weighting, 400 ms
/// blocks with 75% overlap, absolute gate at -70 LKFS and relative gate at
/// -10 LU. Signals shorter than one block, or with no block above the
/// absolute gate, are silence.
LufsValue integrated_loudness(std::span<const float> samples, int sample_rate);

/// Loudness of a pool chunk. Throws InvalidArgument when the chunk does not
/// have the expected rate or length.
LufsValue measure_integrated_lufs(const AudioChunk& chunk, const ChunkFormat& format = {});

/// G = target - measured. Throws SilenceError for silence.
GainResult gain_to_target(const LufsValue& measured, double target_lufs);

/// out[i] = float(double(in[i]) * scale). Same-size spans; may alias.
void apply_gain(std::span<const float> in, std::span<float> out, double scale);

/// Scales the chunk to target loudness. The pad region stays exactly zero.
std::pair<AudioChunk, GainResult> normalize_to_lufs(const AudioChunk& chunk, double target_lufs,
                                                    const ChunkFormat& format = {});

}  // namespace sonify
