#include "sonify/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "sonify/error.hpp"

namespace sonify {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

[[noreturn]] void unreadable(const std::string& id, const std::string& why) {
  throw FormatError("unreadable file '" + id + "': " + why);
}

struct FmtInfo {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

float decode_sample(const std::uint8_t* p, const FmtInfo& f) {
  if (f.format == kFormatFloat) {
    if (f.bits == 32) {
      float v;
      std::uint32_t u = le32(p);
      std::memcpy(&v, &u, 4);
      return v;
    }
    std::uint64_t u = static_cast<std::uint64_t>(le32(p)) | (static_cast<std::uint64_t>(le32(p + 4)) << 32);
    double v;
    std::memcpy(&v, &u, 8);
    return static_cast<float>(v);
  }
  switch (f.bits) {
    case 8:
      return static_cast<float>((static_cast<int>(p[0]) - 128) / 128.0);
    case 16:
      return static_cast<float>(static_cast<std::int16_t>(le16(p)) / 32768.0);
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v -= 0x1000000;
      return static_cast<float>(v / 8388608.0);
    }
    default:
      return static_cast<float>(static_cast<std::int32_t>(le32(p)) / 2147483648.0);
  }
}

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string source_id) {
  if (bytes.empty()) throw FormatError("zero-length stream in '" + source_id + "'");
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    unreadable(source_id, "not a RIFF/WAVE container");

  FmtInfo fmt;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    const std::uint32_t size = le32(hdr + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || size > avail) unreadable(source_id, "truncated fmt chunk");
      const std::uint8_t* p = bytes.data() + body;
      fmt.format = le16(p);
      fmt.channels = le16(p + 2);
      fmt.rate = le32(p + 4);
      fmt.block_align = le16(p + 12);
      fmt.bits = le16(p + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 40) unreadable(source_id, "truncated extensible fmt chunk");
        fmt.format = le16(p + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, avail);
      have_data = true;
      break;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) unreadable(source_id, "missing fmt chunk");
  if (!have_data) unreadable(source_id, "missing data chunk");

  const bool int_ok = fmt.format == kFormatPcm &&
                      (fmt.bits == 8 || fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32);
  const bool float_ok = fmt.format == kFormatFloat && (fmt.bits == 32 || fmt.bits == 64);
  if (!int_ok && !float_ok)
    throw FormatError("unsupported codec in '" + source_id + "' (format tag " + std::to_string(fmt.format) +
                      ", " + std::to_string(fmt.bits) + " bits)");
  if (fmt.channels == 0 || fmt.rate == 0) unreadable(source_id, "zero channels or sample rate");
  const std::size_t sample_bytes = fmt.bits / 8u;
  if (fmt.block_align != sample_bytes * fmt.channels) unreadable(source_id, "inconsistent block alignment");

  const std::size_t frames = data_size / fmt.block_align;
  if (frames == 0) throw FormatError("zero-length stream in '" + source_id + "'");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(fmt.rate);
  clip.source_id = std::move(source_id);
  clip.channels.assign(fmt.channels, std::vector<float>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    const std::uint8_t* frame = data + i * fmt.block_align;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      float v = decode_sample(frame + c * sample_bytes, fmt);
      if (!std::isfinite(v)) unreadable(clip.source_id, "non-finite sample");
      clip.channels[c][i] = std::clamp(v, -1.0f, 1.0f);
    }
  }
  return clip;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw FormatError("unreadable file '" + path.string() + "': cannot open");
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<std::uint8_t> bytes(size);
  in.seekg(0);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size)))
    throw FormatError("unreadable file '" + path.string() + "': read failed");
  return bytes;
}

AudioClip decode_wav(const std::filesystem::path& path) {
  return decode_wav(read_file(path), path.stem().string());
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, SampleFormat format) {
  clip.validate();
  const std::uint16_t channels = static_cast<std::uint16_t>(clip.channel_count());
  const std::uint16_t bits = format == SampleFormat::pcm16 ? 16 : format == SampleFormat::pcm24 ? 24 : 32;
  const std::uint16_t tag = format == SampleFormat::float32 ? kFormatFloat : kFormatPcm;
  const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
  const std::size_t frames = clip.frames();
  const std::uint64_t data_size = static_cast<std::uint64_t>(frames) * block;
  if (data_size > 0xFFFFFFFFull - 36) throw InvalidArgument("clip too long for a RIFF/WAVE file");

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put32(out, static_cast<std::uint32_t>(36 + data_size));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, tag);
  put16(out, channels);
  put32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put32(out, static_cast<std::uint32_t>(clip.sample_rate) * block);
  put16(out, block);
  put16(out, bits);
  put_tag(out, "data");
  put32(out, static_cast<std::uint32_t>(data_size));

  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : clip.channels) {
      const float v = ch[i];
      switch (format) {
        case SampleFormat::float32: {
          std::uint32_t u;
          std::memcpy(&u, &v, 4);
          put32(out, u);
          break;
        }
        case SampleFormat::pcm16: {
          const auto s = static_cast<std::int32_t>(std::clamp(std::lround(v * 32768.0), -32768L, 32767L));
          put16(out, static_cast<std::uint16_t>(s & 0xFFFF));
          break;
        }
        case SampleFormat::pcm24: {
          const auto s = static_cast<std::int32_t>(std::clamp(std::lround(v * 8388608.0), -8388608L, 8388607L));
          out.push_back(static_cast<std::uint8_t>(s & 0xFF));
          out.push_back(static_cast<std::uint8_t>((s >> 8) & 0xFF));
          out.push_back(static_cast<std::uint8_t>((s >> 16) & 0xFF));
          break;
        }
        case SampleFormat::pcm32: {
          const auto s = std::clamp<long long>(std::llround(v * 2147483648.0), -2147483648LL, 2147483647LL);
          put32(out, static_cast<std::uint32_t>(static_cast<std::int32_t>(s)));
          break;
        }
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_wav(std::span<const float> mono, int sample_rate, SampleFormat format) {
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.channels.emplace_back(mono.begin(), mono.end());
  return encode_wav(clip, format);
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace sonify
