#pragma once

// Social-text normalization: MBTI type-mention masking, placeholder
// substitution (@USER / HTTPURL / HASHTAG / DATETIME), emoji textualization,
// and non-ASCII word removal. Every function here is pure and deterministic.

#include <cstdint>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pers/emoji_table.hpp"
#include "pers/errors.hpp"
#include "pers/mbti.hpp"

namespace pers {

namespace detail {

inline bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::uint32_t parse_hex(std::string_view s) {
  std::uint32_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= std::uint32_t(c - '0');
    else if (c >= 'a' && c <= 'f') v |= std::uint32_t(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v |= std::uint32_t(c - 'A' + 10);
    else throw ConfigError("bad hex codepoint '" + std::string(s) + "'");
  }
  return v;
}

// "1F389" or "2764 FE0F" -> UTF-8 byte string.
inline std::string utf8_from_hex_sequence(std::string_view spec) {
  std::string key;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    while (pos < spec.size() && spec[pos] == ' ') ++pos;
    std::size_t end = pos;
    while (end < spec.size() && spec[end] != ' ') ++end;
    if (end > pos) {
      const std::uint32_t cp = parse_hex(spec.substr(pos, end - pos));
      if (cp > 0x10ffff) throw ConfigError("codepoint out of range in '" + std::string(spec) + "'");
      key += utf8_encode(cp);
    }
    pos = end;
  }
  if (key.empty()) throw ConfigError("empty codepoint sequence");
  return key;
}

}  // namespace detail

struct DatetimePattern {
  std::string source;
  std::regex regex;
};

struct NormalizerConfig {
  // UTF-8 emoji byte sequence -> snake_case descriptive name.
  std::unordered_map<std::string, std::string> emoji_table;
  std::size_t max_emoji_key_bytes = 0;
  std::vector<DatetimePattern> datetime_patterns;
  std::string mask_token = "<type>";

  void add_emoji(std::string_view codepoints_hex, std::string name) {
    std::string key = detail::utf8_from_hex_sequence(codepoints_hex);
    if (key.size() > max_emoji_key_bytes) max_emoji_key_bytes = key.size();
    emoji_table[std::move(key)] = std::move(name);
  }

  // A trailing (?![A-Za-z0-9]) is appended so matches end on a token
  // boundary; the leading boundary is checked at replacement time.
  void add_datetime_pattern(const std::string& pattern) {
    datetime_patterns.push_back(
        {pattern, std::regex(pattern + "(?![A-Za-z0-9])",
                             std::regex::ECMAScript | std::regex::icase | std::regex::optimize)});
  }

  static NormalizerConfig defaults() {
    NormalizerConfig cfg;
    for (const auto& [hex, name] : kDefaultEmojiTable) cfg.add_emoji(hex, name);
    cfg.add_datetime_pattern(R"(\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2})?(Z|[+-]\d{2}:?\d{2})?)?)");
    cfg.add_datetime_pattern(
        R"((jan|feb|mar|apr|may|jun|jul|aug|sep|oct|nov|dec)[a-z]*\.? \d{1,2}(st|nd|rd|th)?,? \d{4})");
    cfg.add_datetime_pattern(R"(\d{1,2} (jan|feb|mar|apr|may|jun|jul|aug|sep|oct|nov|dec)[a-z]*\.? \d{4})");
    cfg.add_datetime_pattern(R"(\d{1,2}[/.]\d{1,2}[/.]\d{2,4})");
    cfg.add_datetime_pattern(R"(\d{1,2}:\d{2}(:\d{2})?( ?[ap]\.?m\.?)?)");
    return cfg;
  }

  // CSV rows "codepoints_hex,name"; replaces the bundled table.
  void load_emoji_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open emoji table " + path);
    emoji_table.clear();
    max_emoji_key_bytes = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos)
        throw ConfigError("emoji table line " + std::to_string(lineno) + ": expected 'hex,name'");
      if (lineno == 1 && line.substr(0, comma) == "codepoints_hex") continue;  // header
      add_emoji(line.substr(0, comma), line.substr(comma + 1));
    }
    if (emoji_table.empty()) throw ConfigError("emoji table " + path + " has no entries");
  }

  // One ECMAScript regex per line; '#' starts a comment line.
  void load_datetime_patterns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pattern list " + path);
    datetime_patterns.clear();
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      try {
        add_datetime_pattern(line);
      } catch (const std::regex_error& e) {
        throw ConfigError("bad datetime pattern '" + line + "': " + e.what());
      }
    }
    if (datetime_patterns.empty()) throw ConfigError("pattern list " + path + " has no entries");
  }
};

// Replaces every standalone (word-boundary-delimited) MBTI code with the mask
// token, case-insensitively. Word characters are [A-Za-z0-9_].
inline std::string mask_type_mentions(std::string_view text, std::string_view mask_token = "<type>") {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (detail::is_word_char(text[i])) {
      std::size_t j = i;
      while (j < text.size() && detail::is_word_char(text[j])) ++j;
      const std::string_view run = text.substr(i, j - i);
      if (is_mbti_code(run)) out += mask_token;
      else out += run;
      i = j;
    } else {
      out += text[i++];
    }
  }
  return out;
}

inline bool contains_type_mention(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (detail::is_word_char(text[i])) {
      std::size_t j = i;
      while (j < text.size() && detail::is_word_char(text[j])) ++j;
      if (is_mbti_code(text.substr(i, j - i))) return true;
      i = j;
    } else {
      ++i;
    }
  }
  return false;
}

namespace detail {

inline std::string replace_emoji(const std::string& text, const NormalizerConfig& cfg) {
  if (cfg.emoji_table.empty()) return text;
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::uint8_t(text[i]) < 0x80) {
      out += text[i++];
      continue;
    }
    const std::size_t longest = std::min(cfg.max_emoji_key_bytes, text.size() - i);
    bool matched = false;
    for (std::size_t len = longest; len >= 1; --len) {
      const auto it = cfg.emoji_table.find(text.substr(i, len));
      if (it != cfg.emoji_table.end()) {
        out += " :";
        out += it->second;
        out += ": ";
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) out += text[i++];
  }
  return out;
}

// Sigil ('@' or '#') followed by word characters. Mentions are replaced
// wherever they appear (the "@\w+" idiom); hashtags only at a word boundary,
// so a word-internal '#' is not a tag.
inline std::string replace_sigil_token(const std::string& text, char sigil,
                                       std::string_view placeholder, bool require_boundary) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == sigil && (!require_boundary || out.empty() || !is_word_char(out.back())) &&
        i + 1 < text.size() && is_word_char(text[i + 1])) {
      std::size_t j = i + 1;
      while (j < text.size() && is_word_char(text[j])) ++j;
      out += placeholder;
      i = j;
    } else {
      out += text[i++];
    }
  }
  return out;
}

inline bool matches_at(const std::string& text, std::size_t i, std::string_view prefix) {
  if (i + prefix.size() > text.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    char c = text[i + k];
    if (c >= 'A' && c <= 'Z') c = char(c - 'A' + 'a');
    if (c != prefix[k]) return false;
  }
  return true;
}

inline std::string replace_urls(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t body = 0;
    if (matches_at(text, i, "https://")) body = 8;
    else if (matches_at(text, i, "http://")) body = 7;
    else if (matches_at(text, i, "www.") && (out.empty() || !is_word_char(out.back()))) body = 4;
    if (body > 0 && i + body < text.size() && !is_ascii_space(text[i + body])) {
      std::size_t j = i + body;
      while (j < text.size() && !is_ascii_space(text[j])) ++j;
      out += "HTTPURL";
      i = j;
    } else {
      out += text[i++];
    }
  }
  return out;
}

inline std::string replace_datetimes(const std::string& text, const NormalizerConfig& cfg) {
  std::string current = text;
  for (const auto& pattern : cfg.datetime_patterns) {
    std::string out;
    out.reserve(current.size());
    std::size_t last = 0;
    auto begin = std::sregex_iterator(current.begin(), current.end(), pattern.regex);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      const std::size_t pos = std::size_t(it->position());
      const std::size_t len = std::size_t(it->length());
      if (len == 0) continue;
      if (pos > 0 && is_word_char(current[pos - 1])) continue;  // mid-token, leave alone
      out.append(current, last, pos - last);
      out += "DATETIME";
      last = pos + len;
    }
    out.append(current, last, std::string::npos);
    current = std::move(out);
  }
  return current;
}

// Drops whitespace-delimited tokens containing non-ASCII bytes and collapses
// all remaining whitespace to single spaces.
inline std::string drop_non_ascii_tokens(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ascii_space(text[i])) ++i;
    std::size_t j = i;
    bool ascii = true;
    while (j < text.size() && !is_ascii_space(text[j])) {
      if (std::uint8_t(text[j]) >= 0x80) ascii = false;
      ++j;
    }
    if (j > i && ascii) {
      if (!out.empty()) out += ' ';
      out.append(text, i, j - i);
    }
    i = j;
  }
  return out;
}

}  // namespace detail

// Placeholder substitution in fixed order: emoji, @USER, HTTPURL, HASHTAG,
// DATETIME, then non-ASCII word removal and whitespace collapse. The
// substitution round repeats until stable: one pass can expose a new
// placeholder site (e.g. "@#x" -> "@HASHTAG", whose "@" now fronts a word),
// and idempotence requires those to be resolved here, not on a later call.
inline std::string normalize_social_tokens(const std::string& text, const NormalizerConfig& cfg) {
  std::string s = detail::replace_emoji(text, cfg);
  for (int pass = 0; pass < 8; ++pass) {
    std::string next = detail::replace_sigil_token(s, '@', "@USER", /*require_boundary=*/false);
    next = detail::replace_urls(next);
    next = detail::replace_sigil_token(next, '#', "HASHTAG", /*require_boundary=*/true);
    next = detail::replace_datetimes(next, cfg);
    if (next == s) break;
    s = std::move(next);
  }
  return detail::drop_non_ascii_tokens(s);
}

// Masking runs before tokenization so codes adjacent to punctuation are caught.
inline std::string preprocess_post(const std::string& text, const NormalizerConfig& cfg) {
  return normalize_social_tokens(mask_type_mentions(text, cfg.mask_token), cfg);
}

}  // namespace pers
