#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sonify/mixer.hpp"

namespace sonify {

/// One rendered source of a dataset entry.
struct ManifestSource {
  std::string concept_id;
  std::string object;
  std::string chunk_id;
  double gamma_db = 0.0;
  double raw_score = 0.0;
  double ssr_score = 0.0;
  std::string extractor;
  double threshold_lb = 0.0;
  std::size_t eligible_count = 0;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  bool operator==(const ManifestSource&) const = default;
};

/// One image of the sonified dataset. mix_hash is the SHA-256 of the
/// rendered WAV file.
struct ManifestEntry {
  std::string image_id;
  std::vector<ManifestSource> entries;
  bool clip_policy_applied = false;
  double peak_gain_db = 0.0;
  std::string mix_hash;
  std::uint64_t pipeline_seed = 0;
  std::string config_fingerprint;
  /// Fields this version does not know; kept and written back after the known ones.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  MixRecipe recipe() const;
  bool operator==(const ManifestEntry&) const = default;
};

std::string serialize_manifest_entry(const ManifestEntry& e);
std::string serialize_manifest(std::span<const ManifestEntry> entries);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

/// Schema-checked parse. Unknown fields produce a warning (appended to
/// `warnings` when given) and are preserved. Errors name the row and the
/// byte offset of a malformed or truncated record.
std::vector<ManifestEntry> parse_manifest(std::string_view jsonl, const std::string& origin = "<memory>",
                                          std::vector<std::string>* warnings = nullptr);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path,
                                         std::vector<std::string>* warnings = nullptr);

}  // namespace sonify
