#include "sonify/manifest.hpp"

#include <spdlog/spdlog.h>

#include <set>

#include "sonify/error.hpp"
#include "sonify/wav.hpp"

namespace sonify {
namespace {

using ojson = nlohmann::ordered_json;

const std::set<std::string>& entry_fields() {
  static const std::set<std::string> f{"image_id",     "entries",       "clip_policy_applied", "peak_gain_db",
                                       "mix_hash",     "pipeline_seed", "config_fingerprint"};
  return f;
}

const std::set<std::string>& source_fields() {
  static const std::set<std::string> f{"concept_id", "object",    "chunk_id",     "gamma_db",      "raw_score",
                                       "ssr_score",  "extractor", "threshold_lb", "eligible_count"};
  return f;
}

class RowCheck {
 public:
  RowCheck(const std::string& origin, std::size_t row, std::size_t offset)
      : prefix_(origin + " row " + std::to_string(row) + " (byte offset " + std::to_string(offset) + "): ") {}

  [[noreturn]] void fail(const std::string& msg) const { throw FormatError(prefix_ + msg); }

  const ojson& field(const ojson& j, const char* name) const {
    const auto it = j.find(name);
    if (it == j.end()) fail(std::string("missing field \"") + name + "\"");
    return *it;
  }
  std::string str(const ojson& j, const char* name) const {
    const auto& v = field(j, name);
    if (!v.is_string()) fail(std::string("field \"") + name + "\" must be a string");
    return v.get<std::string>();
  }
  double num(const ojson& j, const char* name) const {
    const auto& v = field(j, name);
    if (!v.is_number()) fail(std::string("field \"") + name + "\" must be a number");
    return v.get<double>();
  }
  std::uint64_t uint(const ojson& j, const char* name) const {
    const auto& v = field(j, name);
    if (!v.is_number_unsigned()) fail(std::string("field \"") + name + "\" must be a non-negative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const ojson& j, const char* name) const {
    const auto& v = field(j, name);
    if (!v.is_boolean()) fail(std::string("field \"") + name + "\" must be a boolean");
    return v.get<bool>();
  }
  const std::string& prefix() const { return prefix_; }

 private:
  std::string prefix_;
};

ojson collect_unknown(const ojson& j, const std::set<std::string>& known, const RowCheck& check,
                      std::vector<std::string>* warnings) {
  ojson extra = ojson::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (known.count(it.key())) continue;
    extra[it.key()] = it.value();
    const std::string msg = check.prefix() + "unknown field \"" + it.key() + "\" preserved";
    spdlog::warn("{}", msg);
    if (warnings) warnings->push_back(msg);
  }
  return extra;
}

}  // namespace

MixRecipe ManifestEntry::recipe() const {
  MixRecipe r;
  r.image_id = image_id;
  for (const auto& s : entries) r.entries.push_back({s.chunk_id, s.gamma_db, s.raw_score, s.ssr_score});
  r.clip_policy_applied = clip_policy_applied;
  r.peak_gain_db = peak_gain_db;
  return r;
}

std::string serialize_manifest_entry(const ManifestEntry& e) {
  ojson j;
  j["image_id"] = e.image_id;
  ojson sources = ojson::array();
  for (const auto& s : e.entries) {
    ojson o;
    o["concept_id"] = s.concept_id;
    o["object"] = s.object;
    o["chunk_id"] = s.chunk_id;
    o["gamma_db"] = s.gamma_db;
    o["raw_score"] = s.raw_score;
    o["ssr_score"] = s.ssr_score;
    o["extractor"] = s.extractor;
    o["threshold_lb"] = s.threshold_lb;
    o["eligible_count"] = s.eligible_count;
    for (auto it = s.extra.begin(); it != s.extra.end(); ++it) o[it.key()] = it.value();
    sources.push_back(std::move(o));
  }
  j["entries"] = std::move(sources);
  j["clip_policy_applied"] = e.clip_policy_applied;
  j["peak_gain_db"] = e.peak_gain_db;
  j["mix_hash"] = e.mix_hash;
  j["pipeline_seed"] = e.pipeline_seed;
  j["config_fingerprint"] = e.config_fingerprint;
  for (auto it = e.extra.begin(); it != e.extra.end(); ++it) j[it.key()] = it.value();
  return j.dump();
}

std::string serialize_manifest(std::span<const ManifestEntry> entries) {
  std::string text;
  for (const auto& e : entries) {
    text += serialize_manifest_entry(e);
    text += '\n';
  }
  return text;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries) {
  const std::string text = serialize_manifest(entries);
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<ManifestEntry> parse_manifest(std::string_view jsonl, const std::string& origin,
                                          std::vector<std::string>* warnings) {
  std::vector<ManifestEntry> out;
  std::size_t start = 0;
  std::size_t row = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(start, end - start);
    const std::size_t offset = start;
    start = end + 1;
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    const RowCheck check(origin, row, offset);
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const ojson::parse_error& e) {
      const std::size_t at = offset + (e.byte > 0 ? e.byte - 1 : 0);
      throw FormatError(origin + " row " + std::to_string(row) + ": truncated or malformed record at byte offset " +
                        std::to_string(at));
    }
    if (!j.is_object()) check.fail("expected a JSON object");

    ManifestEntry e;
    e.image_id = check.str(j, "image_id");
    const auto& sources = check.field(j, "entries");
    if (!sources.is_array() || sources.empty()) check.fail("\"entries\" must be a non-empty array");
    for (const auto& s : sources) {
      if (!s.is_object()) check.fail("entries must be objects");
      ManifestSource m;
      m.concept_id = check.str(s, "concept_id");
      m.object = check.str(s, "object");
      m.chunk_id = check.str(s, "chunk_id");
      m.gamma_db = check.num(s, "gamma_db");
      m.raw_score = check.num(s, "raw_score");
      m.ssr_score = check.num(s, "ssr_score");
      m.extractor = check.str(s, "extractor");
      m.threshold_lb = check.num(s, "threshold_lb");
      m.eligible_count = check.uint(s, "eligible_count");
      m.extra = collect_unknown(s, source_fields(), check, warnings);
      e.entries.push_back(std::move(m));
    }
    e.clip_policy_applied = check.boolean(j, "clip_policy_applied");
    e.peak_gain_db = check.num(j, "peak_gain_db");
    e.mix_hash = check.str(j, "mix_hash");
    e.pipeline_seed = check.uint(j, "pipeline_seed");
    e.config_fingerprint = check.str(j, "config_fingerprint");
    e.extra = collect_unknown(j, entry_fields(), check, warnings);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  const auto bytes = read_file(path);
  return parse_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path.string(),
                        warnings);
}

}  // namespace sonify
