#include "sonify/concepts.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <regex>
#include <set>
#include <sstream>

#include "sonify/error.hpp"
#include "sonify/wav.hpp"

namespace sonify {
namespace {

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

template <typename Fn>
void for_each_row(std::string_view jsonl, const std::string& origin, Fn&& fn) {
  std::size_t row = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(origin + " row " + std::to_string(row) + ": malformed JSON: " + e.what());
    }
    if (!j.is_object()) throw FormatError(origin + " row " + std::to_string(row) + ": expected a JSON object");
    fn(j, row);
  }
}

std::string required_string(const nlohmann::json& j, const char* field, const std::string& origin,
                            std::size_t row, bool allow_empty = false) {
  const auto it = j.find(field);
  if (it == j.end())
    throw FormatError(origin + " row " + std::to_string(row) + ": missing field \"" + field + "\"");
  if (!it->is_string())
    throw FormatError(origin + " row " + std::to_string(row) + ": field \"" + field + "\" must be a string");
  auto s = it->get<std::string>();
  if (!allow_empty && s.find_first_not_of(" \t\r\n") == std::string::npos)
    throw FormatError(origin + " row " + std::to_string(row) + ": field \"" + field + "\" is empty");
  return s;
}

// UTF-8 helpers for case folding.
std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> cps;
  cps.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6 && i + 1 < s.size()) {
      cp = ((c & 0x1Fu) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
      len = 2;
    } else if ((c >> 4) == 0xE && i + 2 < s.size()) {
      cp = ((c & 0x0Fu) << 12) | ((static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 6) |
           (static_cast<unsigned char>(s[i + 2]) & 0x3Fu);
      len = 3;
    } else if ((c >> 3) == 0x1E && i + 3 < s.size()) {
      cp = ((c & 0x07u) << 18) | ((static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 12) |
           ((static_cast<unsigned char>(s[i + 2]) & 0x3Fu) << 6) | (static_cast<unsigned char>(s[i + 3]) & 0x3Fu);
      len = 4;
    }
    cps.push_back(cp);
    i += len;
  }
  return cps;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

void fold_into(char32_t cp, std::string& out) {
  if (cp >= 'A' && cp <= 'Z') cp += 32;
  else if ((cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) || (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) ||
           (cp >= 0x410 && cp <= 0x42F) || (cp >= 0xFF21 && cp <= 0xFF3A))
    cp += 32;
  else if (cp >= 0x400 && cp <= 0x40F) cp += 80;
  else if (cp == 0xDF) {
    out += "ss";
    return;
  } else if (cp == 0x130) {
    out += "i\xCC\x87";
    return;
  } else if (cp == 0xB5) cp = 0x3BC;
  else if (cp == 0x17F) cp = 's';
  else if (cp == 0x178) cp = 0xFF;
  else if (cp == 0x212A) cp = 'k';
  else if (cp == 0x212B) cp = 0xE5;
  else if (cp == 0x3C2) cp = 0x3C3;
  else if (cp == 0x386) cp = 0x3AC;
  else if (cp >= 0x388 && cp <= 0x38A) cp += 37;
  else if (cp == 0x38C) cp = 0x3CC;
  else if (cp == 0x38E || cp == 0x38F) cp += 63;
  else if (cp >= 0x100 && cp <= 0x17E) {
    const bool even_upper = (cp <= 0x12F) || (cp >= 0x132 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177);
    const bool odd_upper = (cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E);
    if ((even_upper && cp % 2 == 0) || (odd_upper && cp % 2 == 1)) cp += 1;
  }
  encode_utf8(cp, out);
}

bool is_word_cp(char32_t cp) {
  if (cp < 0x80) return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (cp >= 0xA0 && cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
  if (cp == 0xFFFD) return false;
  return true;
}

std::string trim(std::string_view s, std::string_view chars = " \t\r\n") {
  const auto b = s.find_first_not_of(chars);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(chars);
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<std::string> default_silent_keywords() {
  return {"logo", "icon", "emblem", "symbol", "trademark", "sign"};
}

std::vector<SoundingConcept> parse_concepts(std::string_view jsonl, const std::string& origin) {
  std::vector<SoundingConcept> out;
  std::set<std::string> seen;
  for_each_row(jsonl, origin, [&](const nlohmann::json& j, std::size_t row) {
    SoundingConcept c{required_string(j, "concept_id", origin, row), required_string(j, "image_id", origin, row),
                      required_string(j, "object", origin, row), required_string(j, "description", origin, row),
                      required_string(j, "extractor", origin, row)};
    if (!seen.insert(c.concept_id).second)
      throw FormatError(origin + " row " + std::to_string(row) + ": duplicate concept_id '" + c.concept_id + "'");
    out.push_back(std::move(c));
  });
  return out;
}

std::vector<SoundingConcept> load_concepts(const std::filesystem::path& path) {
  return parse_concepts(read_text(path), path.string());
}

std::string serialize_concepts(std::span<const SoundingConcept> concepts) {
  std::string text;
  for (const auto& c : concepts) {
    nlohmann::ordered_json j;
    j["concept_id"] = c.concept_id;
    j["image_id"] = c.image_id;
    j["object"] = c.object;
    j["description"] = c.description;
    j["extractor"] = c.extractor;
    text += j.dump() + "\n";
  }
  return text;
}

void save_concepts(const std::filesystem::path& path, std::span<const SoundingConcept> concepts) {
  write_text(path, serialize_concepts(concepts));
}

std::vector<ImageRecord> parse_images(std::string_view jsonl, const std::string& origin) {
  std::vector<ImageRecord> out;
  std::set<std::string> seen;
  for_each_row(jsonl, origin, [&](const nlohmann::json& j, std::size_t row) {
    ImageRecord r{required_string(j, "image_id", origin, row), required_string(j, "caption", origin, row, true),
                  j.contains("source_tag") ? required_string(j, "source_tag", origin, row, true) : std::string()};
    if (!seen.insert(r.image_id).second)
      throw FormatError(origin + " row " + std::to_string(row) + ": duplicate image_id '" + r.image_id + "'");
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<ImageRecord> load_images(const std::filesystem::path& path) {
  return parse_images(read_text(path), path.string());
}

std::string serialize_images(std::span<const ImageRecord> images) {
  std::string text;
  for (const auto& r : images) {
    nlohmann::ordered_json j;
    j["image_id"] = r.image_id;
    j["caption"] = r.caption;
    j["source_tag"] = r.source_tag;
    text += j.dump() + "\n";
  }
  return text;
}

void save_images(const std::filesystem::path& path, std::span<const ImageRecord> images) {
  write_text(path, serialize_images(images));
}

std::string case_fold(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  for (char32_t cp : decode_utf8(utf8)) fold_into(cp, out);
  return out;
}

std::vector<std::string> folded_words(std::string_view utf8) {
  std::vector<std::string> words;
  std::string current;
  for (char32_t cp : decode_utf8(utf8)) {
    if (is_word_cp(cp)) {
      fold_into(cp, current);
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

FilterResult filter_silent_images(std::span<const ImageRecord> records, std::span<const std::string> keywords) {
  if (keywords.empty()) throw InvalidArgument("keyword list is empty");
  std::vector<std::vector<std::string>> needles;
  for (const auto& k : keywords) {
    auto w = folded_words(k);
    if (w.empty()) throw InvalidArgument("invalid keyword '" + k + "'");
    needles.push_back(std::move(w));
  }

  FilterResult result;
  for (const auto& rec : records) {
    const auto words = folded_words(rec.caption);
    const std::string* hit = nullptr;
    for (std::size_t k = 0; k < needles.size() && !hit; ++k) {
      if (std::search(words.begin(), words.end(), needles[k].begin(), needles[k].end()) != words.end())
        hit = &keywords[k];
    }
    if (hit)
      result.discarded.push_back({rec, *hit});
    else
      result.kept.push_back(rec);
  }
  return result;
}

std::vector<ParsedSound> parse_numbered_list(std::string_view text, std::size_t max_items) {
  static const std::regex item(R"(^\s*\d+\s*[.)]\s*(.*)$)");
  std::vector<ParsedSound> out;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (out.size() < max_items && std::getline(lines, line)) {
    std::smatch m;
    if (!std::regex_match(line, m, item)) continue;
    std::string body = m[1].str();
    std::erase(body, '*');
    auto split = body.find(':');
    std::size_t skip = 1;
    if (split == std::string::npos) {
      split = body.find(" - ");
      skip = 3;
    }
    if (split == std::string::npos) continue;
    ParsedSound s{trim(body.substr(0, split)), trim(body.substr(split + skip))};
    if (s.object.empty() || s.description.empty()) continue;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SoundingConcept> select_concepts(std::span<const SoundingConcept> image_concepts,
                                             std::size_t max_sources, Rng& rng) {
  if (image_concepts.empty() || max_sources == 0) return {};
  std::vector<std::string> tags;
  for (const auto& c : image_concepts) tags.push_back(c.extractor);
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  const std::string& chosen = tags[rng.below(tags.size())];

  std::vector<SoundingConcept> out;
  for (const auto& c : image_concepts) {
    if (c.extractor != chosen) continue;
    out.push_back(c);
    if (out.size() == max_sources) break;
  }
  return out;
}

}  // namespace sonify
