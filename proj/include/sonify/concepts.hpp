#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sonify/rng.hpp"

namespace sonify {

struct ImageRecord {
  std::string image_id;
  std::string caption;
  std::string source_tag;

  bool operator==(const ImageRecord&) const = default;
};

/// A sound attributed to an object visible in an image.
struct SoundingConcept {
  std::string concept_id;
  std::string image_id;
  std::string object;
  std::string description;
  std::string extractor;

  bool operator==(const SoundingConcept&) const = default;
};

struct PromptTemplate {
  std::string_view name;
  std::string_view text;
};

/// Visually aligned caption prompt.
inline constexpr PromptTemplate kDescriptivePrompt{
    "descriptive", "Provide a short and concise description of the following image."};

/// Sonically aligned prompt; the response is a numbered "object: sound" list.
inline constexpr PromptTemplate kSoundingConceptPrompt{
    "sounding_concept",
    "As a numbered list, provide one to up to three sound(s) associated with prominent objects visible and "
    "present in the image. Provide the objects followed by their associated sound"};

/// Captions containing any of these words mark images of inherently silent content.
std::vector<std::string> default_silent_keywords();

std::vector<SoundingConcept> parse_concepts(std::string_view jsonl, const std::string& origin = "<memory>");
std::vector<SoundingConcept> load_concepts(const std::filesystem::path& path);
std::string serialize_concepts(std::span<const SoundingConcept> concepts);
void save_concepts(const std::filesystem::path& path, std::span<const SoundingConcept> concepts);

std::vector<ImageRecord> parse_images(std::string_view jsonl, const std::string& origin = "<memory>");
std::vector<ImageRecord> load_images(const std::filesystem::path& path);
std::string serialize_images(std::span<const ImageRecord> images);
void save_images(const std::filesystem::path& path, std::span<const ImageRecord> images);

/// Simple Unicode case folding for UTF-8 text (ASCII, Latin-1, Latin
/// Extended-A, Greek, Cyrillic, and the few code points that fold into
/// ASCII such as U+212A KELVIN SIGN and U+017F LONG S).
std::string case_fold(std::string_view utf8);

/// Case-folded words: maximal runs of letters, digits and non-ASCII code points.
std::vector<std::string> folded_words(std::string_view utf8);

struct DiscardedImage {
  ImageRecord record;
  std::string keyword;
};

struct FilterResult {
  std::vector<ImageRecord> kept;
  std::vector<DiscardedImage> discarded;
};

/// Discards records whose caption contains a keyword as a whole word after
/// case folding. Throws InvalidArgument for an empty keyword list or an
/// empty keyword.
FilterResult filter_silent_images(std::span<const ImageRecord> records, std::span<const std::string> keywords);

struct ParsedSound {
  std::string object;
  std::string description;
};

/// Parses "1. object: sound description" lines. Returns at most max_items.
std::vector<ParsedSound> parse_numbered_list(std::string_view text, std::size_t max_items = 3);

/// Concepts to render for one image: picks one extractor's concepts at random
/// (extractor tags sorted, so the choice depends only on the rng) and keeps
/// at most max_sources of them in their original order.
std::vector<SoundingConcept> select_concepts(std::span<const SoundingConcept> image_concepts,
                                             std::size_t max_sources, Rng& rng);

}  // namespace sonify
