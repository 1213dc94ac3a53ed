#include "sonify/pool.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "sonify/error.hpp"
#include "sonify/hash.hpp"
#include "sonify/wav.hpp"

namespace fs = std::filesystem;

namespace sonify {
namespace {

bool is_wav(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav" || ext == ".wave";
}

struct FileResult {
  std::vector<ChunkRecord> records;
  std::string error;
};

}  // namespace

std::vector<AudioChunk> standardize_clip(const AudioClip& clip, const StandardizeConfig& cfg) {
  const AudioClip mono = resample(downmix_to_mono(clip), cfg.sample_rate);
  const auto min_frames = static_cast<std::size_t>(cfg.min_clip_seconds * cfg.sample_rate);
  if (mono.frames() < std::max<std::size_t>(1, min_frames))
    throw InvalidArgument("clip shorter than " + std::to_string(cfg.min_clip_seconds) + " s");
  return chunk(mono, cfg.chunk_seconds);
}

std::string source_id_for(const fs::path& root, const fs::path& file) {
  fs::path rel = fs::relative(file, root);
  rel.replace_extension();
  std::string id;
  for (const auto& part : rel) {
    if (!id.empty()) id += "__";
    id += part.string();
  }
  return id;
}

PoolManifest standardize_pool(const fs::path& input_dir, const fs::path& output_dir, const StandardizeConfig& cfg) {
  if (!fs::is_directory(input_dir)) throw InvalidArgument("input directory does not exist: " + input_dir.string());
  chunk_length(cfg.sample_rate, cfg.chunk_seconds);
  fs::create_directories(output_dir);

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(input_dir))
    if (entry.is_regular_file() && is_wav(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  PoolManifest manifest;
  std::vector<std::string> ids(files.size());
  std::vector<bool> duplicate(files.size(), false);
  {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < files.size(); ++i) {
      ids[i] = source_id_for(input_dir, files[i]);
      duplicate[i] = !seen.insert(ids[i]).second;
    }
  }

  std::vector<FileResult> results(files.size());
  const auto n = static_cast<std::int64_t>(files.size());
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& res = results[static_cast<std::size_t>(i)];
    const auto& file = files[static_cast<std::size_t>(i)];
    if (duplicate[static_cast<std::size_t>(i)]) {
      res.error = "duplicate source id '" + ids[static_cast<std::size_t>(i)] + "'";
      continue;
    }
    try {
      AudioClip clip = decode_wav(read_file(file), ids[static_cast<std::size_t>(i)]);
      for (const auto& ch : standardize_clip(clip, cfg)) {
        const auto bytes = encode_wav(ch.samples, ch.sample_rate);
        const std::string id = ch.id();
        write_file_atomic(output_dir / (id + ".wav"), bytes);
        res.records.push_back({id, ch.source_id, ch.chunk_index, ch.pad_samples, sha256_hex(bytes)});
      }
    } catch (const std::exception& e) {
      res.records.clear();
      res.error = e.what();
    }
  }

  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!results[i].error.empty()) {
      spdlog::warn("skipping {}: {}", files[i].string(), results[i].error);
      manifest.skipped.push_back({files[i].string(), results[i].error});
      continue;
    }
    for (auto& r : results[i].records) manifest.chunks.push_back(std::move(r));
  }
  std::sort(manifest.chunks.begin(), manifest.chunks.end(), [](const ChunkRecord& a, const ChunkRecord& b) {
    return std::tie(a.source_id, a.chunk_index) < std::tie(b.source_id, b.chunk_index);
  });
  write_pool_manifest(output_dir / kPoolManifestName, manifest.chunks);
  return manifest;
}

void write_pool_manifest(const fs::path& path, const std::vector<ChunkRecord>& rows) {
  std::string text;
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["chunk_id"] = r.chunk_id;
    j["source_id"] = r.source_id;
    j["chunk_index"] = r.chunk_index;
    j["pad_samples"] = r.pad_samples;
    j["sha256"] = r.sha256;
    text += j.dump();
    text += '\n';
  }
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<ChunkRecord> read_pool_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open pool manifest " + path.string());
  std::vector<ChunkRecord> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      rows.push_back({j.at("chunk_id").get<std::string>(), j.at("source_id").get<std::string>(),
                      j.at("chunk_index").get<std::size_t>(), j.at("pad_samples").get<std::size_t>(),
                      j.at("sha256").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + " row " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

DirectoryChunkStore::DirectoryChunkStore(fs::path dir, ChunkFormat format) : dir_(std::move(dir)), format_(format) {
  for (auto& r : read_pool_manifest(dir_ / kPoolManifestName)) {
    if (records_.count(r.chunk_id)) throw FormatError("duplicate chunk_id in pool manifest: " + r.chunk_id);
    std::string id = r.chunk_id;
    records_.emplace(std::move(id), std::move(r));
  }
}

bool DirectoryChunkStore::contains(const std::string& chunk_id) const { return records_.count(chunk_id) > 0; }

AudioChunk DirectoryChunkStore::load(const std::string& chunk_id) const {
  const auto it = records_.find(chunk_id);
  if (it == records_.end()) throw Error("unknown chunk_id '" + chunk_id + "'");
  const AudioClip clip = decode_wav(dir_ / (chunk_id + ".wav"));
  if (clip.channel_count() != 1 || clip.sample_rate != format_.sample_rate || clip.frames() != format_.length)
    throw FormatError("chunk '" + chunk_id + "' does not match the pool format");
  AudioChunk ch;
  ch.samples = clip.channels.front();
  ch.sample_rate = clip.sample_rate;
  ch.source_id = it->second.source_id;
  ch.chunk_index = it->second.chunk_index;
  ch.pad_samples = it->second.pad_samples;
  return ch;
}

void MemoryChunkStore::add(AudioChunk chunk) {
  std::string id = chunk.id();
  chunks_.insert_or_assign(std::move(id), std::move(chunk));
}

bool MemoryChunkStore::contains(const std::string& chunk_id) const { return chunks_.count(chunk_id) > 0; }

AudioChunk MemoryChunkStore::load(const std::string& chunk_id) const {
  const auto it = chunks_.find(chunk_id);
  if (it == chunks_.end()) throw Error("unknown chunk_id '" + chunk_id + "'");
  return it->second;
}

}  // namespace sonify
