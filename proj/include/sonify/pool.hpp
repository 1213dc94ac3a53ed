#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sonify/audio.hpp"

namespace sonify {

struct StandardizeConfig {
  int sample_rate = 16000;
  double chunk_seconds = 5.0;
  /// Recordings shorter than this after resampling are dropped as degenerate.
  double min_clip_seconds = 0.1;
  bool parallel = true;
};

/// One row of pool.jsonl. sha256 covers the chunk's WAV file bytes.
struct ChunkRecord {
  std::string chunk_id;
  std::string source_id;
  std::size_t chunk_index = 0;
  std::size_t pad_samples = 0;
  std::string sha256;

  bool operator==(const ChunkRecord&) const = default;
};

struct SkippedFile {
  std::string path;
  std::string reason;
};

struct PoolManifest {
  std::vector<ChunkRecord> chunks;
  std::vector<SkippedFile> skipped;
};

inline constexpr const char* kPoolManifestName = "pool.jsonl";

/// downmix -> resample -> chunk for one decoded clip.
std::vector<AudioChunk> standardize_clip(const AudioClip& clip, const StandardizeConfig& cfg);

/// Source id for a file under the input root: relative path without
/// extension, directory separators replaced by "__".
std::string source_id_for(const std::filesystem::path& root, const std::filesystem::path& file);

/// Standardizes every .wav file under input_dir (recursively) into
/// output_dir/<chunk_id>.wav and writes output_dir/pool.jsonl. Files that
/// fail to decode are reported in `skipped` and never abort the batch.
PoolManifest standardize_pool(const std::filesystem::path& input_dir, const std::filesystem::path& output_dir,
                              const StandardizeConfig& cfg = {});

void write_pool_manifest(const std::filesystem::path& path, const std::vector<ChunkRecord>& rows);
std::vector<ChunkRecord> read_pool_manifest(const std::filesystem::path& path);

/// Resolves chunk ids to waveforms.
class ChunkStore {
 public:
  virtual ~ChunkStore() = default;
  /// Throws Error when the id is unknown.
  virtual AudioChunk load(const std::string& chunk_id) const = 0;
  virtual bool contains(const std::string& chunk_id) const = 0;
};

/// Chunk files produced by standardize_pool. Provenance and padding come
/// from pool.jsonl; each loaded chunk is checked against the expected format.
class DirectoryChunkStore final : public ChunkStore {
 public:
  explicit DirectoryChunkStore(std::filesystem::path dir, ChunkFormat format = {});
  AudioChunk load(const std::string& chunk_id) const override;
  bool contains(const std::string& chunk_id) const override;
  const std::map<std::string, ChunkRecord>& records() const { return records_; }

 private:
  std::filesystem::path dir_;
  ChunkFormat format_;
  std::map<std::string, ChunkRecord> records_;
};

class MemoryChunkStore final : public ChunkStore {
 public:
  void add(AudioChunk chunk);
  AudioChunk load(const std::string& chunk_id) const override;
  bool contains(const std::string& chunk_id) const override;

 private:
  std::map<std::string, AudioChunk> chunks_;
};

}  // namespace sonify
