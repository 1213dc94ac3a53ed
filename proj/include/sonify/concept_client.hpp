#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sonify/concepts.hpp"

namespace sonify {

/// Client settings for the external concept-extraction service.
///
/// Wire format: HTTP POST to `endpoint` with JSON body {image_uri, prompt};
/// the service answers {text}. A non-empty auth_token is sent as
/// "Authorization: Bearer <token>".
struct ConceptServiceConfig {
  std::string endpoint;  // http[s]://host[:port]/path
  std::string auth_token;
  std::string extractor = "vlm";
  std::vector<PromptTemplate> templates{kSoundingConceptPrompt};
  std::size_t max_in_flight = 8;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
  std::chrono::milliseconds max_backoff{4000};
  std::chrono::milliseconds timeout{30000};
  std::size_t max_sources = 3;

  /// Reads the [concept_service] table of a TOML file, then applies
  /// SONIFY_CONCEPT_ENDPOINT / SONIFY_CONCEPT_TOKEN from the environment.
  static ConceptServiceConfig from_toml(const std::filesystem::path& path);
  void apply_environment();
};

struct ImageRef {
  std::string image_id;
  std::string uri;
};

struct FetchIssue {
  std::string image_id;
  std::string reason;
};

struct FetchReport {
  std::vector<SoundingConcept> concepts;  // image order, then list order
  std::vector<FetchIssue> skipped;        // unparseable responses
  std::vector<FetchIssue> failures;       // transport errors after all retries
};

/// One request per image per template. Concept ids are
/// "<image_id>:<extractor>:<n>" with n counting from 1 per image.
FetchReport fetch_concepts(const ConceptServiceConfig& cfg, std::span<const ImageRef> images);

/// Backoff before retry `attempt` (1-based): initial * 2^(attempt-1), capped.
std::chrono::milliseconds retry_backoff(const ConceptServiceConfig& cfg, int attempt);

}  // namespace sonify
