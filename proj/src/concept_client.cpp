#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "sonify/concept_client.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <regex>
#include <thread>
#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "sonify/error.hpp"

namespace sonify {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw InvalidArgument("invalid concept service endpoint '" + url + "'");
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

struct Outcome {
  std::vector<ParsedSound> sounds;
  bool skipped = false;
  std::string error;
};

Outcome query_image(const ConceptServiceConfig& cfg, const Endpoint& ep, const ImageRef& image) {
  httplib::Client client(ep.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!cfg.auth_token.empty()) headers.emplace("Authorization", "Bearer " + cfg.auth_token);

  Outcome out;
  bool any_parsed = false;
  for (const auto& tmpl : cfg.templates) {
    const std::string body =
        nlohmann::json{{"image_uri", image.uri}, {"prompt", std::string(tmpl.text)}}.dump();
    std::string last_error;
    std::string text;
    bool done = false;
    int attempts = 0;
    for (int attempt = 1; attempt <= cfg.max_attempts && !done; ++attempt) {
      attempts = attempt;
      if (attempt > 1) std::this_thread::sleep_for(retry_backoff(cfg, attempt - 1));
      auto res = client.Post(ep.path, headers, body, "application/json");
      if (!res) {
        last_error = "transport failure: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500 || res->status == 429) {
        last_error = "service returned HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        last_error = "service returned HTTP " + std::to_string(res->status);
        break;
      }
      try {
        text = nlohmann::json::parse(res->body).at("text").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        last_error = std::string("malformed response: ") + e.what();
        break;
      }
      done = true;
    }
    if (!done) {
      out.error = "image '" + image.image_id + "': " + last_error + " after " +
                  std::to_string(attempts) + " attempt(s)";
      return out;
    }
    auto sounds = parse_numbered_list(text, cfg.max_sources);
    if (!sounds.empty()) any_parsed = true;
    for (auto& s : sounds) out.sounds.push_back(std::move(s));
  }
  out.skipped = !any_parsed;
  return out;
}

}  // namespace

std::chrono::milliseconds retry_backoff(const ConceptServiceConfig& cfg, int attempt) {
  auto delay = cfg.initial_backoff;
  for (int i = 1; i < attempt && delay < cfg.max_backoff; ++i) delay *= 2;
  return std::min(delay, cfg.max_backoff);
}

void ConceptServiceConfig::apply_environment() {
  if (const char* e = std::getenv("SONIFY_CONCEPT_ENDPOINT"); e && *e) endpoint = e;
  if (const char* t = std::getenv("SONIFY_CONCEPT_TOKEN"); t && *t) auth_token = t;
}

ConceptServiceConfig ConceptServiceConfig::from_toml(const std::filesystem::path& path) {
  ConceptServiceConfig cfg;
  toml::table tbl;
  try {
    tbl = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw FormatError(path.string() + ": " + std::string(e.description()));
  }
  if (const auto* svc = tbl["concept_service"].as_table()) {
    const auto& t = *svc;
    cfg.endpoint = t["endpoint"].value_or(cfg.endpoint);
    cfg.auth_token = t["auth_token"].value_or(cfg.auth_token);
    cfg.extractor = t["extractor"].value_or(cfg.extractor);
    cfg.max_in_flight = t["max_in_flight"].value_or<std::int64_t>(static_cast<std::int64_t>(cfg.max_in_flight));
    cfg.max_attempts = static_cast<int>(t["max_attempts"].value_or<std::int64_t>(cfg.max_attempts));
    cfg.timeout = std::chrono::milliseconds(t["timeout_ms"].value_or<std::int64_t>(cfg.timeout.count()));
    cfg.max_sources = t["max_sources"].value_or<std::int64_t>(static_cast<std::int64_t>(cfg.max_sources));
    if (t["include_descriptive_prompt"].value_or(false)) cfg.templates.insert(cfg.templates.begin(), kDescriptivePrompt);
  }
  cfg.apply_environment();
  return cfg;
}

FetchReport fetch_concepts(const ConceptServiceConfig& cfg, std::span<const ImageRef> images) {
  if (cfg.endpoint.empty()) throw InvalidArgument("concept service endpoint is not configured");
  if (cfg.max_attempts < 1) throw InvalidArgument("max_attempts must be >= 1");
  if (cfg.templates.empty()) throw InvalidArgument("no prompt templates configured");
  const Endpoint ep = split_endpoint(cfg.endpoint);

  std::vector<Outcome> outcomes(images.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < images.size(); i = next++) outcomes[i] = query_image(cfg, ep, images[i]);
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.max_in_flight, images.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  FetchReport report;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    auto& o = outcomes[i];
    if (!o.error.empty()) {
      spdlog::error("{}", o.error);
      report.failures.push_back({img.image_id, o.error});
      continue;
    }
    if (o.skipped) {
      spdlog::warn("image '{}': response had no parseable numbered list", img.image_id);
      report.skipped.push_back({img.image_id, "unparseable response"});
      continue;
    }
    std::size_t n = 0;
    for (auto& s : o.sounds) {
      report.concepts.push_back({img.image_id + ":" + cfg.extractor + ":" + std::to_string(++n), img.image_id,
                                 std::move(s.object), std::move(s.description), cfg.extractor});
    }
  }
  return report;
}

}  // namespace sonify
