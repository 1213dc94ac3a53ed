// sonify: command-line front end for the sonification pipeline.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "sonify/concept_client.hpp"
#include "sonify/concepts.hpp"
#include "sonify/embed_store.hpp"
#include "sonify/error.hpp"
#include "sonify/loudness.hpp"
#include "sonify/metrics.hpp"
#include "sonify/pipeline.hpp"
#include "sonify/pool.hpp"
#include "sonify/retrieval.hpp"
#include "sonify/wav.hpp"

namespace fs = std::filesystem;
using namespace sonify;

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

AudioChunk chunk_from_file(const fs::path& p) {
  const AudioClip mono = downmix_to_mono(decode_wav(p));
  AudioChunk c;
  c.samples = mono.channels.front();
  c.sample_rate = mono.sample_rate;
  c.source_id = mono.source_id;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pair images with retrieved, loudness-normalized audio and evaluate the result"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // standardize
  auto* std_cmd = app.add_subcommand("standardize", "Decode, downmix, resample and chunk a directory of WAV files");
  fs::path std_in, std_out;
  StandardizeConfig std_cfg;
  bool std_sequential = false;
  std_cmd->add_option("--in", std_in, "Input directory")->required();
  std_cmd->add_option("--out", std_out, "Output directory")->required();
  std_cmd->add_option("--rate", std_cfg.sample_rate, "Target sample rate")->capture_default_str();
  std_cmd->add_option("--chunk-seconds", std_cfg.chunk_seconds, "Chunk length in seconds")->capture_default_str();
  std_cmd->add_flag("--sequential", std_sequential, "Disable file-level parallelism");

  // lufs
  auto* lufs_cmd = app.add_subcommand("lufs", "Integrated loudness tools");
  lufs_cmd->require_subcommand(1);
  auto* measure_cmd = lufs_cmd->add_subcommand("measure", "Print integrated loudness as JSON rows");
  std::vector<fs::path> measure_files;
  measure_cmd->add_option("files", measure_files, "WAV files")->required();
  auto* normalize_cmd = lufs_cmd->add_subcommand("normalize", "Scale a file to a target loudness");
  double norm_target = -23.0;
  fs::path norm_in, norm_out;
  normalize_cmd->add_option("--target", norm_target, "Target dB-LUFS")->capture_default_str();
  normalize_cmd->add_option("file", norm_in, "Input WAV")->required();
  normalize_cmd->add_option("-o,--out", norm_out, "Output WAV (32-bit float)")->required();

  // retrieve
  auto* ret_cmd = app.add_subcommand("retrieve", "Match each concept to a pool chunk");
  fs::path ret_pool, ret_concepts, ret_meta, ret_out;
  RetrievalConfig ret_cfg;
  std::string ret_tie = "inclusive";
  bool ret_sequential = false;
  ret_cmd->add_option("--pool", ret_pool, "Pool embeddings (SEMB)")->required();
  ret_cmd->add_option("--concepts", ret_concepts, "Concept text embeddings (SEMB)")->required();
  ret_cmd->add_option("--concept-meta", ret_meta, "concepts.jsonl")->required();
  ret_cmd->add_option("--k", ret_cfg.top_k, "Top-k for the dynamic threshold")->capture_default_str();
  ret_cmd->add_option("--seed", ret_cfg.seed, "Master seed")->capture_default_str();
  ret_cmd->add_option("--tie-policy", ret_tie, "inclusive or strict")->capture_default_str();
  ret_cmd->add_option("--out", ret_out, "matches.jsonl")->required();
  ret_cmd->add_flag("--sequential", ret_sequential, "Run concepts one after another");

  // filter
  auto* filt_cmd = app.add_subcommand("filter", "Drop images whose caption names silent content");
  fs::path filt_images, filt_kept, filt_discarded;
  std::string filt_keywords = "logo,icon,emblem,symbol,trademark,sign";
  filt_cmd->add_option("--images", filt_images, "images.jsonl")->required();
  filt_cmd->add_option("--keywords", filt_keywords, "Comma-separated keywords")->capture_default_str();
  filt_cmd->add_option("--kept", filt_kept, "Write kept records here (default: stdout)");
  filt_cmd->add_option("--discarded", filt_discarded, "Write discarded records with their keyword here");

  // concepts fetch
  auto* concepts_cmd = app.add_subcommand("concepts", "Sounding-concept extraction service client");
  concepts_cmd->require_subcommand(1);
  auto* fetch_cmd = concepts_cmd->add_subcommand("fetch", "Query the concept service for every image");
  fs::path fetch_images, fetch_config, fetch_out;
  std::string fetch_uri_template, fetch_extractor;
  fetch_cmd->add_option("--images", fetch_images, "images.jsonl")->required();
  fetch_cmd->add_option("--uri-template", fetch_uri_template, "Image URI with {image_id} placeholder")->required();
  fetch_cmd->add_option("--config", fetch_config, "TOML file with a [concept_service] table");
  fetch_cmd->add_option("--extractor", fetch_extractor, "Extractor tag recorded on each concept");
  fetch_cmd->add_option("--out", fetch_out, "concepts.jsonl")->required();

  // metrics
  auto* met_cmd = app.add_subcommand("metrics", "AIS, IIS and Frechet distance");
  met_cmd->require_subcommand(1);
  fs::path met_a, met_b;
  auto add_ab = [&](CLI::App* c) {
    c->add_option("--a", met_a, "First SEMB file")->required();
    c->add_option("--b", met_b, "Second SEMB file")->required();
  };
  auto* ais_cmd = met_cmd->add_subcommand("ais", "Audio-image similarity");
  auto* iis_cmd = met_cmd->add_subcommand("iis", "Image-image similarity");
  auto* fid_cmd = met_cmd->add_subcommand("fid", "Frechet distance between feature sets");
  add_ab(ais_cmd);
  add_ab(iis_cmd);
  add_ab(fid_cmd);

  // study loudness
  auto* study_cmd = app.add_subcommand("study", "Embedding studies");
  study_cmd->require_subcommand(1);
  auto* study_loud = study_cmd->add_subcommand("loudness", "KNN loudness-retention study");
  fs::path study_dir, study_out;
  std::string study_gains = "-30:3:6", study_embedder = "raw";
  std::size_t study_k = 1, study_prefix = 256;
  study_loud->add_option("--chunks", study_dir, "Directory of WAV chunks")->required();
  study_loud->add_option("--gains", study_gains, "start:step:stop in dB")->capture_default_str();
  study_loud->add_option("--embedder", study_embedder, "raw or l2")->capture_default_str();
  study_loud->add_option("--prefix", study_prefix, "Samples used by the raw embedder")->capture_default_str();
  study_loud->add_option("--k", study_k, "Neighbours")->capture_default_str();
  study_loud->add_option("--out", study_out, "study.json")->required();

  // run / replay
  auto* run_cmd = app.add_subcommand("run", "Run the full pipeline from a TOML config");
  fs::path run_config;
  run_cmd->add_option("--config", run_config, "sonify.toml")->required();
  auto* replay_cmd = app.add_subcommand("replay", "Re-render a manifest and verify its waveform hashes");
  fs::path replay_manifest_path, replay_pool, replay_out;
  replay_cmd->add_option("--manifest", replay_manifest_path, "manifest.jsonl")->required();
  replay_cmd->add_option("--pool-dir", replay_pool, "Standardized pool directory")->required();
  replay_cmd->add_option("--out", replay_out, "Write regenerated WAVs here");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("sonify"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*std_cmd) {
      std_cfg.parallel = !std_sequential;
      const auto m = standardize_pool(std_in, std_out, std_cfg);
      spdlog::info("{} chunks written, {} files skipped", m.chunks.size(), m.skipped.size());
      return 0;
    }

    if (*measure_cmd) {
      int status = 0;
      for (const auto& f : measure_files) {
        nlohmann::ordered_json row;
        row["file"] = f.string();
        try {
          const AudioChunk c = chunk_from_file(f);
          const LufsValue v = integrated_loudness(c.samples, c.sample_rate);
          row["lufs"] = v.is_silence ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v.value);
          row["silence"] = v.is_silence;
        } catch (const std::exception& e) {
          row["error"] = e.what();
          status = 1;
        }
        std::cout << row.dump() << '\n';
      }
      return status;
    }

    if (*normalize_cmd) {
      const AudioChunk c = chunk_from_file(norm_in);
      const GainResult g = gain_to_target(integrated_loudness(c.samples, c.sample_rate), norm_target);
      std::vector<float> out(c.samples.size());
      apply_gain(c.samples, out, g.linear_scale);
      write_file_atomic(norm_out, encode_wav(out, c.sample_rate));
      std::cout << nlohmann::ordered_json{{"file", norm_in.string()}, {"gain_db", g.gain_db},
                                          {"linear_scale", g.linear_scale}}
                       .dump()
                << '\n';
      return 0;
    }

    if (*ret_cmd) {
      ret_cfg.tie_policy = parse_tie_policy(ret_tie);
      const auto pool = load_embeddings(ret_pool);
      const auto text = load_embeddings(ret_concepts);
      const auto concepts = load_concepts(ret_meta);
      const auto outcomes =
          batch_retrieve(concepts, text, pool, ret_cfg, ret_sequential ? Execution::sequential : Execution::parallel);
      std::string lines;
      std::size_t failed = 0;
      for (const auto& o : outcomes) {
        nlohmann::ordered_json j;
        j["concept_id"] = o.concept_id;
        if (o.ok()) {
          j["chunk_id"] = o.match->chunk_id;
          j["raw_score"] = o.match->raw_score;
          j["ssr_score"] = o.match->ssr_score;
          j["threshold_lb"] = o.match->threshold_lb;
          j["eligible_count"] = o.match->eligible_count;
        } else {
          j["error"] = o.error;
          ++failed;
        }
        lines += j.dump() + "\n";
      }
      write_text(ret_out, lines);
      spdlog::info("{} concepts matched, {} failed", outcomes.size() - failed, failed);
      return 0;
    }

    if (*filt_cmd) {
      const auto images = load_images(filt_images);
      const auto keywords = split_csv(filt_keywords);
      const auto res = filter_silent_images(images, keywords);
      const std::string kept = serialize_images(res.kept);
      if (filt_kept.empty())
        std::cout << kept;
      else
        write_text(filt_kept, kept);
      if (!filt_discarded.empty()) {
        std::string lines;
        for (const auto& d : res.discarded)
          lines += nlohmann::ordered_json{{"image_id", d.record.image_id},
                                          {"caption", d.record.caption},
                                          {"source_tag", d.record.source_tag},
                                          {"keyword", d.keyword}}
                       .dump() +
                   "\n";
        write_text(filt_discarded, lines);
      }
      spdlog::info("{} kept, {} discarded", res.kept.size(), res.discarded.size());
      return 0;
    }

    if (*fetch_cmd) {
      ConceptServiceConfig cfg;
      if (!fetch_config.empty())
        cfg = ConceptServiceConfig::from_toml(fetch_config);
      else
        cfg.apply_environment();
      if (!fetch_extractor.empty()) cfg.extractor = fetch_extractor;
      std::vector<ImageRef> refs;
      for (const auto& img : load_images(fetch_images)) {
        std::string uri = fetch_uri_template;
        for (auto pos = uri.find("{image_id}"); pos != std::string::npos; pos = uri.find("{image_id}"))
          uri.replace(pos, 10, img.image_id);
        refs.push_back({img.image_id, uri});
      }
      const auto report = fetch_concepts(cfg, refs);
      save_concepts(fetch_out, report.concepts);
      spdlog::info("{} concepts, {} images skipped, {} failures", report.concepts.size(), report.skipped.size(),
                   report.failures.size());
      return report.failures.empty() ? 0 : 2;
    }

    if (*ais_cmd || *iis_cmd) {
      const auto a = load_embeddings(met_a);
      const auto b = load_embeddings(met_b);
      const double v = *ais_cmd ? ais(a, b) : iis(a, b);
      std::cout << nlohmann::ordered_json{{*ais_cmd ? "ais" : "iis", v}, {"n", a.rows()}}.dump() << '\n';
      return 0;
    }

    if (*fid_cmd) {
      const LoadOptions raw{.normalize_rows = false};
      const auto a = gaussian_stats(load_embeddings(met_a, raw));
      const auto b = gaussian_stats(load_embeddings(met_b, raw));
      std::cout << nlohmann::ordered_json{{"fid", frechet_distance(a, b)}, {"n_a", a.n}, {"n_b", b.n}}.dump()
                << '\n';
      return 0;
    }

    if (*study_loud) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(study_dir))
        if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      std::vector<AudioChunk> items;
      for (const auto& f : files) items.push_back(chunk_from_file(f));
      Embedder embedder = raw_prefix_embedder(study_prefix);
      if (study_embedder == "l2")
        embedder = l2_normalized(embedder);
      else if (study_embedder != "raw")
        throw InvalidArgument("unknown embedder '" + study_embedder + "'");
      const auto grid = parse_gain_grid(study_gains);
      const auto res = knn_loudness_study(items, embedder, grid, study_k);
      const nlohmann::ordered_json j{{"gains_db", res.gains_db}, {"accuracy", res.accuracy}};
      write_text(study_out, j.dump(2) + "\n");
      return 0;
    }

    if (*run_cmd) {
      const auto report = run_pipeline(PipelineConfig::from_toml(run_config));
      spdlog::info("{} images rendered, {} skipped, {} discarded", report.manifest.size(), report.skipped.size(),
                   report.discarded.size());
      return 0;
    }

    if (*replay_cmd) {
      const auto manifest = read_manifest(replay_manifest_path);
      const DirectoryChunkStore store(replay_pool);
      const auto checks = replay_manifest(manifest, store, {},
                                          replay_out.empty() ? std::nullopt : std::optional<fs::path>(replay_out));
      std::size_t bad = 0;
      for (const auto& c : checks) {
        if (c.ok()) continue;
        ++bad;
        spdlog::error("{}: {}", c.image_id, c.error.empty() ? "hash mismatch " + c.actual_hash : c.error);
      }
      spdlog::info("{} of {} entries reproduced", checks.size() - bad, checks.size());
      return bad == 0 ? 0 : 3;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
