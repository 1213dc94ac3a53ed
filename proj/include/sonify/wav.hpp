#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sonify/audio.hpp"

namespace sonify {

enum class SampleFormat { pcm16, pcm24, pcm32, float32 };

/// Reads a RIFF/WAVE file: integer PCM (8/16/24/32-bit) or IEEE float
/// (32/64-bit), plain or WAVE_FORMAT_EXTENSIBLE. Samples come back scaled to
/// [-1, 1] and deinterleaved. source_id defaults to the file stem.
///
/// Throws FormatError with "unreadable file", "unsupported codec" or
/// "zero-length stream" in the message.
AudioClip decode_wav(const std::filesystem::path& path);
AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string source_id);

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, SampleFormat format = SampleFormat::float32);
std::vector<std::uint8_t> encode_wav(std::span<const float> mono, int sample_rate,
                                     SampleFormat format = SampleFormat::float32);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace sonify
