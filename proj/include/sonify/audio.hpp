#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sonify {

/// Decoded recording at its native rate and channel layout.
struct AudioClip {
  std::vector<std::vector<float>> channels;
  int sample_rate = 0;
  std::string source_id;

  std::size_t frames() const { return channels.empty() ? 0 : channels.front().size(); }
  std::size_t channel_count() const { return channels.size(); }

  /// Throws InvalidArgument when channels are ragged or the rate is not positive.
  void validate() const;
};

/// Fixed-length mono segment of the standardized pool. The final pad_samples
/// entries are exact zeros and a chunk is never pure padding.
struct AudioChunk {
  std::vector<float> samples;
  int sample_rate = 0;
  std::string source_id;
  std::size_t chunk_index = 0;
  std::size_t pad_samples = 0;

  std::string id() const;
  std::span<const float> content() const {
    return std::span<const float>(samples).first(samples.size() - pad_samples);
  }
};

/// Expected shape of a pool chunk.
struct ChunkFormat {
  int sample_rate = 16000;
  std::size_t length = 80000;
};

std::string make_chunk_id(const std::string& source_id, std::size_t chunk_index);

/// Samples per chunk; rounds chunk_seconds * rate to the nearest integer.
std::size_t chunk_length(int sample_rate, double chunk_seconds);

/// Channel mean. Mono input is returned unchanged.
AudioClip downmix_to_mono(const AudioClip& clip);

/// Band-limited resampling of a mono clip. Identity when the rate already matches.
AudioClip resample(const AudioClip& clip, int target_rate);
std::vector<float> resample(std::span<const float> input, int input_rate, int target_rate);

/// Non-overlapping segmentation with zero padding of the last chunk.
std::vector<AudioChunk> chunk(const AudioClip& clip, double chunk_seconds);

}  // namespace sonify
