#include "sonify/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <map>
#include <set>
#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "sonify/error.hpp"
#include "sonify/hash.hpp"
#include "sonify/wav.hpp"

namespace fs = std::filesystem;

namespace sonify {
namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

bool safe_file_stem(const std::string& id) {
  return !id.empty() && id != "." && id != ".." && id.find('/') == std::string::npos &&
         id.find('\\') == std::string::npos && id.find('\0') == std::string::npos;
}

void require_input(const fs::path& p, const char* what) {
  if (p.empty() || !fs::exists(p)) throw Error(std::string("missing input artifact: ") + what + " (" + p.string() + ")");
}

struct ImageWork {
  const ImageRecord* image = nullptr;
  std::vector<SoundingConcept> concepts;
  std::size_t first = 0;  // offset into the flattened concept list
};

struct ImageResult {
  std::optional<ManifestEntry> entry;
  std::string skip_reason;
};

}  // namespace

PipelineConfig PipelineConfig::from_toml(const fs::path& path) {
  toml::table tbl;
  try {
    tbl = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw FormatError(path.string() + ": " + std::string(e.description()));
  }
  PipelineConfig cfg;
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");

  const auto seed = tbl["seed"].value_or<std::int64_t>(static_cast<std::int64_t>(cfg.seed));
  if (seed < 0) throw InvalidArgument("seed must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.parallel = tbl["parallel"].value_or(cfg.parallel);

  const auto k = tbl["retrieval"]["top_k"].value_or<std::int64_t>(static_cast<std::int64_t>(cfg.retrieval.top_k));
  if (k < 1) throw InvalidArgument("retrieval.top_k must be >= 1");
  cfg.retrieval.top_k = static_cast<std::size_t>(k);
  cfg.retrieval.tie_policy =
      parse_tie_policy(tbl["retrieval"]["tie_policy"].value_or(std::string(to_string(cfg.retrieval.tie_policy))));

  cfg.mixer.range.center = tbl["mixer"]["gain_center"].value_or(cfg.mixer.range.center);
  cfg.mixer.range.half_width = tbl["mixer"]["gain_half_width"].value_or(cfg.mixer.range.half_width);
  const auto ms = tbl["mixer"]["max_sources"].value_or<std::int64_t>(static_cast<std::int64_t>(cfg.mixer.max_sources));
  if (ms < 1) throw InvalidArgument("mixer.max_sources must be >= 1");
  cfg.mixer.max_sources = static_cast<std::size_t>(ms);

  if (const auto* kw = tbl["filter"]["keywords"].as_array()) {
    cfg.keywords.clear();
    for (const auto& v : *kw) {
      const auto s = v.value<std::string>();
      if (!s) throw InvalidArgument("filter.keywords must be strings");
      cfg.keywords.push_back(*s);
    }
  }

  const auto& p = tbl["paths"];
  cfg.paths.pool_dir = resolve(base, p["pool_dir"].value_or(std::string()));
  cfg.paths.pool_embeddings = resolve(base, p["pool_embeddings"].value_or(std::string()));
  cfg.paths.concept_embeddings = resolve(base, p["concept_embeddings"].value_or(std::string()));
  cfg.paths.concepts = resolve(base, p["concepts"].value_or(std::string()));
  cfg.paths.images = resolve(base, p["images"].value_or(std::string()));
  cfg.paths.output_dir = resolve(base, p["output_dir"].value_or(std::string("out")));
  cfg.apply_env_overrides();
  return cfg;
}

void PipelineConfig::apply_env_overrides() {
  const std::pair<const char*, fs::path*> vars[] = {
      {"SONIFY_POOL_DIR", &paths.pool_dir},
      {"SONIFY_POOL_EMBEDDINGS", &paths.pool_embeddings},
      {"SONIFY_CONCEPT_EMBEDDINGS", &paths.concept_embeddings},
      {"SONIFY_CONCEPTS", &paths.concepts},
      {"SONIFY_IMAGES", &paths.images},
      {"SONIFY_OUTPUT_DIR", &paths.output_dir},
  };
  for (const auto& [name, target] : vars)
    if (const char* v = std::getenv(name); v && *v) *target = v;
}

nlohmann::ordered_json PipelineConfig::parameters() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["top_k"] = retrieval.top_k;
  j["tie_policy"] = to_string(retrieval.tie_policy);
  j["gain_center"] = mixer.range.center;
  j["gain_half_width"] = mixer.range.half_width;
  j["max_sources"] = mixer.max_sources;
  j["sample_rate"] = mixer.format.sample_rate;
  j["chunk_length"] = mixer.format.length;
  j["keywords"] = keywords;
  return j;
}

std::string PipelineConfig::fingerprint() const { return sha256_hex(parameters().dump()); }

std::string waveform_hash(const AudioChunk& audio) { return sha256_hex(encode_wav(audio.samples, audio.sample_rate)); }

PipelineReport run_pipeline(const PipelineConfig& cfg) {
  require_input(cfg.paths.images, "images");
  require_input(cfg.paths.concepts, "concepts");
  require_input(cfg.paths.pool_embeddings, "pool embeddings");
  require_input(cfg.paths.concept_embeddings, "concept embeddings");
  require_input(cfg.paths.pool_dir / kPoolManifestName, "pool manifest");
  cfg.retrieval.validate();
  cfg.mixer.range.validate();

  const Execution exec = cfg.parallel ? Execution::parallel : Execution::sequential;
  const std::string fingerprint = cfg.fingerprint();
  PipelineReport report;

  const auto images = load_images(cfg.paths.images);
  FilterResult filtered = filter_silent_images(images, cfg.keywords);
  spdlog::info("{} images, {} kept, {} discarded by keyword filter", images.size(), filtered.kept.size(),
               filtered.discarded.size());
  report.discarded = std::move(filtered.discarded);

  std::map<std::string, std::vector<SoundingConcept>> by_image;
  std::set<std::string> kept_ids;
  for (const auto& img : filtered.kept) kept_ids.insert(img.image_id);
  std::set<std::string> all_ids;
  for (const auto& img : images) all_ids.insert(img.image_id);
  for (auto& c : load_concepts(cfg.paths.concepts)) {
    if (!all_ids.count(c.image_id)) {
      spdlog::warn("concept '{}' references unknown image '{}'; ignored", c.concept_id, c.image_id);
      continue;
    }
    if (kept_ids.count(c.image_id)) by_image[c.image_id].push_back(std::move(c));
  }

  const EmbeddingMatrix pool = load_embeddings(cfg.paths.pool_embeddings);
  const EmbeddingMatrix text = load_embeddings(cfg.paths.concept_embeddings);
  const DirectoryChunkStore store(cfg.paths.pool_dir, cfg.mixer.format);

  std::vector<ImageWork> work;
  std::vector<SoundingConcept> flat;
  for (const auto& img : filtered.kept) {
    if (!safe_file_stem(img.image_id)) {
      report.skipped.push_back({img.image_id, "image_id is not usable as a file name"});
      continue;
    }
    const auto it = by_image.find(img.image_id);
    Rng rng(derive_seed(cfg.seed, "select:" + img.image_id));
    auto chosen = it == by_image.end() ? std::vector<SoundingConcept>{}
                                       : select_concepts(it->second, cfg.mixer.max_sources, rng);
    if (chosen.empty()) {
      report.skipped.push_back({img.image_id, "no sounding concepts"});
      continue;
    }
    ImageWork w{&img, std::move(chosen), flat.size()};
    flat.insert(flat.end(), w.concepts.begin(), w.concepts.end());
    work.push_back(std::move(w));
  }

  RetrievalConfig rcfg = cfg.retrieval;
  rcfg.seed = cfg.seed;
  const auto outcomes = batch_retrieve(flat, text, pool, rcfg, exec);

  const fs::path audio_dir = cfg.paths.output_dir / "audio";
  fs::create_directories(audio_dir);

  std::vector<ImageResult> results(work.size());
  const auto n = static_cast<std::int64_t>(work.size());
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
  for (std::int64_t wi = 0; wi < n; ++wi) {
    const auto& w = work[static_cast<std::size_t>(wi)];
    auto& res = results[static_cast<std::size_t>(wi)];
    std::vector<MatchResult> matches;
    std::vector<const SoundingConcept*> matched_concepts;
    std::string errors;
    for (std::size_t c = 0; c < w.concepts.size(); ++c) {
      const auto& o = outcomes[w.first + c];
      if (o.ok()) {
        matches.push_back(*o.match);
        matched_concepts.push_back(&w.concepts[c]);
      } else {
        errors += (errors.empty() ? "" : "; ") + o.concept_id + ": " + o.error;
      }
    }
    if (matches.empty()) {
      res.skip_reason = "no retrievable concepts (" + errors + ")";
      continue;
    }
    try {
      Rng rng(derive_seed(cfg.seed, "mix:" + w.image->image_id));
      RenderedPair pair = render_pair(w.image->image_id, matches, store, rng, cfg.mixer);
      const auto bytes = encode_wav(pair.audio.samples, pair.audio.sample_rate);
      write_file_atomic(audio_dir / (w.image->image_id + ".wav"), bytes);

      ManifestEntry e;
      e.image_id = w.image->image_id;
      for (std::size_t r = 0; r < pair.recipe.entries.size(); ++r) {
        const auto& m = matches[pair.used_matches[r]];
        const auto* source = matched_concepts[pair.used_matches[r]];
        ManifestSource s;
        s.concept_id = source->concept_id;
        s.object = source->object;
        s.chunk_id = m.chunk_id;
        s.gamma_db = pair.recipe.entries[r].gamma_db;
        s.raw_score = m.raw_score;
        s.ssr_score = m.ssr_score;
        s.extractor = source->extractor;
        s.threshold_lb = m.threshold_lb;
        s.eligible_count = m.eligible_count;
        e.entries.push_back(std::move(s));
      }
      e.clip_policy_applied = pair.recipe.clip_policy_applied;
      e.peak_gain_db = pair.recipe.peak_gain_db;
      e.mix_hash = sha256_hex(bytes);
      e.pipeline_seed = cfg.seed;
      e.config_fingerprint = fingerprint;
      res.entry = std::move(e);
    } catch (const std::exception& ex) {
      res.skip_reason = ex.what();
    }
  }

  for (std::size_t i = 0; i < work.size(); ++i) {
    if (results[i].entry) {
      report.manifest.push_back(std::move(*results[i].entry));
    } else {
      report.skipped.push_back({work[i].image->image_id, results[i].skip_reason});
    }
  }
  for (const auto& s : report.skipped) spdlog::warn("skipped image '{}': {}", s.image_id, s.reason);

  report.manifest_path = cfg.paths.output_dir / "manifest.jsonl";
  write_manifest(report.manifest_path, report.manifest);
  spdlog::info("wrote {} entries to {}", report.manifest.size(), report.manifest_path.string());
  return report;
}

std::vector<ReplayCheck> replay_manifest(std::span<const ManifestEntry> manifest, const ChunkStore& store,
                                         const ChunkFormat& format, const std::optional<fs::path>& out_dir) {
  if (out_dir) fs::create_directories(*out_dir);
  std::vector<ReplayCheck> checks;
  for (const auto& e : manifest) {
    ReplayCheck c{e.image_id, e.mix_hash, {}, {}};
    try {
      const AudioChunk audio = replay_recipe(e.recipe(), store, format);
      const auto bytes = encode_wav(audio.samples, audio.sample_rate);
      c.actual_hash = sha256_hex(bytes);
      if (out_dir && safe_file_stem(e.image_id)) write_file_atomic(*out_dir / (e.image_id + ".wav"), bytes);
    } catch (const std::exception& ex) {
      c.error = ex.what();
    }
    checks.push_back(std::move(c));
  }
  return checks;
}

}  // namespace sonify
