#include "sonify/loudness.hpp"

#include <numbers>
#include <vector>

#include "sonify/error.hpp"

namespace sonify {
namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;
};

// Pre-filter (high shelf) and RLB high-pass, derived for an arbitrary rate
// from their analog prototypes.
std::pair<Biquad, Biquad> k_weighting(double rate) {
  constexpr double kShelfF0 = 1681.974450955533;
  constexpr double kShelfGainDb = 3.999843853973347;
  constexpr double kShelfQ = 0.7071752369554196;
  constexpr double kHighpassF0 = 38.13547087602444;
  constexpr double kHighpassQ = 0.5003270373238773;

  double k = std::tan(std::numbers::pi * kShelfF0 / rate);
  const double vh = std::pow(10.0, kShelfGainDb / 20.0);
  const double vb = std::pow(vh, 0.4996667741545416);
  double a0 = 1.0 + k / kShelfQ + k * k;
  const Biquad shelf{(vh + vb * k / kShelfQ + k * k) / a0, 2.0 * (k * k - vh) / a0,
                     (vh - vb * k / kShelfQ + k * k) / a0, 2.0 * (k * k - 1.0) / a0,
                     (1.0 - k / kShelfQ + k * k) / a0};

  k = std::tan(std::numbers::pi * kHighpassF0 / rate);
  a0 = 1.0 + k / kHighpassQ + k * k;
  const Biquad highpass{1.0, -2.0, 1.0, 2.0 * (k * k - 1.0) / a0, (1.0 - k / kHighpassQ + k * k) / a0};
  return {shelf, highpass};
}

void run_biquad(const Biquad& f, std::vector<double>& x) {
  double z1 = 0.0, z2 = 0.0;  // transposed direct form II
  for (double& v : x) {
    const double y = f.b0 * v + z1;
    z1 = f.b1 * v - f.a1 * y + z2;
    z2 = f.b2 * v - f.a2 * y;
    v = y;
  }
}

double block_loudness(double mean_square) { return -0.691 + 10.0 * std::log10(mean_square); }

}  // namespace

LufsValue integrated_loudness(std::span<const float> samples, int sample_rate) {
  if (sample_rate <= 0) throw InvalidArgument("sample_rate must be positive");
  const auto block = static_cast<std::size_t>(std::llround(kBlockSeconds * sample_rate));
  const auto hop = static_cast<std::size_t>(std::llround(kHopSeconds * sample_rate));
  if (block == 0 || hop == 0 || samples.size() < block) return LufsValue::silence();

  std::vector<double> x(samples.begin(), samples.end());
  const auto [shelf, highpass] = k_weighting(sample_rate);
  run_biquad(shelf, x);
  run_biquad(highpass, x);

  const std::size_t blocks = (x.size() - block) / hop + 1;
  std::vector<double> power(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    double acc = 0.0;
    for (std::size_t i = b * hop, end = b * hop + block; i < end; ++i) acc += x[i] * x[i];
    power[b] = acc / static_cast<double>(block);
  }

  double sum = 0.0;
  std::size_t count = 0;
  for (double z : power) {
    if (z > 0.0 && block_loudness(z) > kAbsoluteGateLufs) {
      sum += z;
      ++count;
    }
  }
  if (count == 0) return LufsValue::silence();

  const double relative_gate = block_loudness(sum / static_cast<double>(count)) + kRelativeGateLu;
  double gated_sum = 0.0;
  std::size_t gated = 0;
  for (double z : power) {
    if (z > 0.0) {
      const double l = block_loudness(z);
      if (l > kAbsoluteGateLufs && l > relative_gate) {
        gated_sum += z;
        ++gated;
      }
    }
  }
  return LufsValue::of(block_loudness(gated_sum / static_cast<double>(gated)));
}

LufsValue measure_integrated_lufs(const AudioChunk& chunk, const ChunkFormat& format) {
  if (chunk.sample_rate != format.sample_rate)
    throw InvalidArgument("wrong sample rate: expected " + std::to_string(format.sample_rate) + " Hz, got " +
                          std::to_string(chunk.sample_rate));
  if (chunk.samples.size() != format.length)
    throw InvalidArgument("wrong length: expected " + std::to_string(format.length) + " samples, got " +
                          std::to_string(chunk.samples.size()));
  return integrated_loudness(chunk.samples, chunk.sample_rate);
}

GainResult gain_to_target(const LufsValue& measured, double target_lufs) {
  if (measured.is_silence) throw SilenceError();
  return GainResult::from_db(target_lufs - measured.value);
}

void apply_gain(std::span<const float> in, std::span<float> out, double scale) {
  if (in.size() != out.size()) throw InvalidArgument("apply_gain: size mismatch");
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = static_cast<float>(static_cast<double>(in[i]) * scale);
}

std::pair<AudioChunk, GainResult> normalize_to_lufs(const AudioChunk& chunk, double target_lufs,
                                                    const ChunkFormat& format) {
  const GainResult gain = gain_to_target(measure_integrated_lufs(chunk, format), target_lufs);
  AudioChunk out = chunk;
  apply_gain(chunk.samples, out.samples, gain.linear_scale);
  return {std::move(out), gain};
}

}  // namespace sonify
