#include "sonify/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sonify/error.hpp"

namespace sonify {

void AudioClip::validate() const {
  if (sample_rate <= 0) throw InvalidArgument("sample_rate must be positive");
  if (channels.empty()) throw InvalidArgument("clip has no channels");
  for (const auto& ch : channels)
    if (ch.size() != channels.front().size()) throw InvalidArgument("channels have unequal length");
}

std::string make_chunk_id(const std::string& source_id, std::size_t chunk_index) {
  char suffix[32];
  std::snprintf(suffix, sizeof suffix, "_%04zu", chunk_index);
  return source_id + suffix;
}

std::string AudioChunk::id() const { return make_chunk_id(source_id, chunk_index); }

std::size_t chunk_length(int sample_rate, double chunk_seconds) {
  if (sample_rate <= 0) throw InvalidArgument("sample_rate must be positive");
  if (!(chunk_seconds > 0.0)) throw InvalidArgument("chunk_seconds must be positive");
  const auto len = static_cast<std::size_t>(std::llround(chunk_seconds * sample_rate));
  if (len == 0) throw InvalidArgument("chunk length rounds to zero samples");
  return len;
}

AudioClip downmix_to_mono(const AudioClip& clip) {
  clip.validate();
  if (clip.channel_count() == 1) return clip;

  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.source_id = clip.source_id;
  const std::size_t n = clip.frames();
  const double inv = 1.0 / static_cast<double>(clip.channel_count());
  std::vector<float> mono(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (const auto& ch : clip.channels) acc += ch[i];
    mono[i] = static_cast<float>(acc * inv);
  }
  out.channels.push_back(std::move(mono));
  return out;
}

AudioClip resample(const AudioClip& clip, int target_rate) {
  clip.validate();
  if (clip.channel_count() != 1) throw InvalidArgument("resample expects a mono clip");
  if (target_rate <= 0) throw InvalidArgument("target_rate must be positive");
  if (target_rate == clip.sample_rate) return clip;
  AudioClip out;
  out.sample_rate = target_rate;
  out.source_id = clip.source_id;
  out.channels.push_back(resample(clip.channels.front(), clip.sample_rate, target_rate));
  return out;
}

std::vector<AudioChunk> chunk(const AudioClip& clip, double chunk_seconds) {
  clip.validate();
  if (clip.channel_count() != 1) throw InvalidArgument("chunk expects a mono clip");
  const std::size_t total = clip.frames();
  if (total == 0) throw InvalidArgument("cannot chunk an empty clip");
  const std::size_t len = chunk_length(clip.sample_rate, chunk_seconds);
  const std::size_t count = (total + len - 1) / len;
  const auto& src = clip.channels.front();

  std::vector<AudioChunk> chunks;
  chunks.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    AudioChunk ch;
    ch.sample_rate = clip.sample_rate;
    ch.source_id = clip.source_id;
    ch.chunk_index = c;
    ch.samples.assign(len, 0.0f);
    const std::size_t begin = c * len;
    const std::size_t avail = std::min(len, total - begin);
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(begin), avail, ch.samples.begin());
    ch.pad_samples = len - avail;
    chunks.push_back(std::move(ch));
  }
  return chunks;
}

}  // namespace sonify
