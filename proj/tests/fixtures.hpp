#pragma once

// Synthetic signals, temporary directories and a small on-disk pipeline
// fixture shared by the unit and acceptance tests.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sonify/audio.hpp"
#include "sonify/concepts.hpp"
#include "sonify/embed_store.hpp"
#include "sonify/pipeline.hpp"
#include "sonify/pool.hpp"
#include "sonify/rng.hpp"
#include "sonify/wav.hpp"

namespace fixtures {

namespace fs = std::filesystem;

inline std::vector<float> sine(double freq, double amplitude, int rate, std::size_t n, double phase = 0.0) {
  std::vector<float> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = static_cast<float>(amplitude * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate + phase));
  return v;
}

inline std::vector<float> noise(std::uint64_t seed, double amplitude, std::size_t n) {
  sonify::Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(amplitude * (2.0 * rng.uniform01() - 1.0));
  return v;
}

inline sonify::AudioChunk make_chunk(std::vector<float> samples, std::string source = "src", std::size_t index = 0,
                                     std::size_t pad = 0, int rate = 16000) {
  sonify::AudioChunk c;
  c.samples = std::move(samples);
  c.sample_rate = rate;
  c.source_id = std::move(source);
  c.chunk_index = index;
  c.pad_samples = pad;
  return c;
}

inline sonify::AudioClip mono_clip(std::vector<float> samples, int rate, std::string id = "clip") {
  sonify::AudioClip c;
  c.channels.push_back(std::move(samples));
  c.sample_rate = rate;
  c.source_id = std::move(id);
  return c;
}

/// Unique directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "sonify") {
    std::random_device rd;
    path_ = fs::temp_directory_path() / (tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

inline sonify::EmbeddingMatrix random_matrix(std::size_t n, std::size_t dim, std::uint64_t seed,
                                             const std::string& prefix = "r", bool normalize = true) {
  sonify::Rng rng(seed);
  std::vector<float> data(n * dim);
  for (auto& x : data) x = static_cast<float>(rng.normal());
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = prefix + std::to_string(i);
  return sonify::EmbeddingMatrix(n, dim, std::move(data), std::move(ids), "test", normalize);
}

/// Source recordings of varied rate, layout and content. Each is
/// `seconds_per_source` long, so the pool holds sources * ceil(s / 5) chunks.
inline void write_source_recordings(const fs::path& dir, std::size_t sources, double seconds_per_source) {
  fs::create_directories(dir);
  const int rates[] = {16000, 22050, 44100, 48000};
  for (std::size_t s = 0; s < sources; ++s) {
    const int rate = rates[s % 4];
    const auto n = static_cast<std::size_t>(std::llround(seconds_per_source * rate));
    sonify::AudioClip clip;
    clip.sample_rate = rate;
    auto tone = sine(220.0 * static_cast<double>(s + 1), 0.3, rate, n);
    const auto hiss = noise(100 + s, 0.05, n);
    for (std::size_t i = 0; i < n; ++i) tone[i] += hiss[i];
    clip.channels.push_back(tone);
    if (s % 2 == 1) clip.channels.push_back(sine(330.0, 0.2, rate, n));
    const auto fmt = s % 3 == 0 ? sonify::SampleFormat::pcm16 : sonify::SampleFormat::float32;
    const auto bytes = sonify::encode_wav(clip, fmt);
    sonify::write_file_atomic(dir / ("rec" + std::to_string(s) + ".wav"), bytes);
  }
}

/// Pool of 10 recordings x 5 chunks, 10 images with 1-4 concepts from one or
/// two extractors, random embeddings. Returns a config pointing at it.
inline sonify::PipelineConfig build_pipeline_fixture(const fs::path& root, std::size_t images = 10,
                                                     std::size_t dim = 32) {
  write_source_recordings(root / "raw", 10, 25.0);
  const auto manifest = sonify::standardize_pool(root / "raw", root / "pool", {});

  std::vector<std::string> chunk_ids;
  for (const auto& r : manifest.chunks) chunk_ids.push_back(r.chunk_id);
  sonify::Rng rng(2024);
  std::vector<float> pool_data(chunk_ids.size() * dim);
  for (auto& x : pool_data) x = static_cast<float>(rng.normal());
  sonify::save_embeddings(root / "pool.semb",
                          sonify::EmbeddingMatrix(chunk_ids.size(), dim, pool_data, chunk_ids, "audio-test", true));

  static const char* objects[] = {"dog", "car", "bird", "train", "river", "crowd", "bell", "wind", "clock", "cat"};
  std::vector<sonify::ImageRecord> recs;
  std::vector<sonify::SoundingConcept> concepts;
  for (std::size_t i = 0; i < images; ++i) {
    const std::string id = "img" + std::to_string(i);
    recs.push_back({id, std::string("a photo of a ") + objects[i % 10], "test"});
    const std::size_t n = 1 + i % 4;
    for (std::size_t c = 0; c < n; ++c) {
      const std::string ex = (i % 3 == 0 && c % 2 == 1) ? "alt" : "vlm";
      concepts.push_back({id + ":" + ex + ":" + std::to_string(c + 1), id, objects[(i + c) % 10],
                          std::string("sound of ") + objects[(i + c) % 10], ex});
    }
  }
  sonify::save_images(root / "images.jsonl", recs);
  sonify::save_concepts(root / "concepts.jsonl", concepts);

  std::vector<std::string> concept_ids;
  for (const auto& c : concepts) concept_ids.push_back(c.concept_id);
  std::vector<float> text_data(concept_ids.size() * dim);
  for (auto& x : text_data) x = static_cast<float>(rng.normal());
  sonify::save_embeddings(root / "concepts.semb",
                          sonify::EmbeddingMatrix(concept_ids.size(), dim, text_data, concept_ids, "text-test", true));

  sonify::PipelineConfig cfg;
  cfg.seed = 7;
  cfg.retrieval.top_k = 5;
  cfg.paths.pool_dir = root / "pool";
  cfg.paths.pool_embeddings = root / "pool.semb";
  cfg.paths.concept_embeddings = root / "concepts.semb";
  cfg.paths.concepts = root / "concepts.jsonl";
  cfg.paths.images = root / "images.jsonl";
  cfg.paths.output_dir = root / "out";
  return cfg;
}

}  // namespace fixtures
