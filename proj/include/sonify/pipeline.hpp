#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sonify/concepts.hpp"
#include "sonify/manifest.hpp"
#include "sonify/mixer.hpp"
#include "sonify/pool.hpp"
#include "sonify/retrieval.hpp"

namespace sonify {

struct PipelinePaths {
  std::filesystem::path pool_dir;            // chunk WAVs + pool.jsonl
  std::filesystem::path pool_embeddings;     // SEMB, ids = chunk ids
  std::filesystem::path concept_embeddings;  // SEMB, ids = concept ids
  std::filesystem::path concepts;            // concepts.jsonl
  std::filesystem::path images;              // images.jsonl
  std::filesystem::path output_dir;          // manifest.jsonl + audio/<image_id>.wav
};

struct PipelineConfig {
  std::uint64_t seed = 7;
  RetrievalConfig retrieval;
  MixerConfig mixer;
  std::vector<std::string> keywords = default_silent_keywords();
  bool parallel = true;
  PipelinePaths paths;

  /// Relative paths are resolved against the config file's directory.
  static PipelineConfig from_toml(const std::filesystem::path& path);

  /// SONIFY_POOL_DIR, SONIFY_POOL_EMBEDDINGS, SONIFY_CONCEPT_EMBEDDINGS,
  /// SONIFY_CONCEPTS, SONIFY_IMAGES, SONIFY_OUTPUT_DIR. Paths only.
  void apply_env_overrides();

  /// Canonical JSON of every parameter that affects the output. Paths and
  /// the execution mode are excluded.
  nlohmann::ordered_json parameters() const;
  std::string fingerprint() const;
};

struct SkippedImage {
  std::string image_id;
  std::string reason;
};

struct PipelineReport {
  std::vector<ManifestEntry> manifest;
  std::vector<SkippedImage> skipped;
  std::vector<DiscardedImage> discarded;
  std::filesystem::path manifest_path;
};

/// filter images -> select concepts -> batch retrieval -> render each image
/// -> write manifest. Missing inputs abort; per-image failures are skipped
/// with a reason.
PipelineReport run_pipeline(const PipelineConfig& cfg);

std::string waveform_hash(const AudioChunk& audio);

struct ReplayCheck {
  std::string image_id;
  std::string expected_hash;
  std::string actual_hash;
  std::string error;
  bool ok() const { return error.empty() && expected_hash == actual_hash; }
};

/// Re-renders every entry from its recipe and compares waveform hashes.
/// Writes <out_dir>/<image_id>.wav when out_dir is given.
std::vector<ReplayCheck> replay_manifest(std::span<const ManifestEntry> manifest, const ChunkStore& store,
                                         const ChunkFormat& format = {},
                                         const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace sonify
