#include "converge/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>

namespace converge::text {

namespace {

// Length in bytes of the whitespace code point starting at s[i], or 0.
std::size_t whitespace_length(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 == ' ' || (b0 >= 0x09 && b0 <= 0x0d)) return 1;
  if (b0 == 0xc2 && i + 1 < s.size()) {
    const auto b1 = static_cast<unsigned char>(s[i + 1]);
    if (b1 == 0x85 || b1 == 0xa0) return 2;  // NEL, NBSP
    return 0;
  }
  if (i + 2 >= s.size()) return 0;
  const auto b1 = static_cast<unsigned char>(s[i + 1]);
  const auto b2 = static_cast<unsigned char>(s[i + 2]);
  if (b0 == 0xe1 && b1 == 0x9a && b2 == 0x80) return 3;  // U+1680
  if (b0 == 0xe2 && b1 == 0x80) {
    if (b2 <= 0x8a) return 3;                  // U+2000..U+200A
    if (b2 == 0xa8 || b2 == 0xa9) return 3;    // U+2028, U+2029
    if (b2 == 0xaf) return 3;                  // U+202F
    return 0;
  }
  if (b0 == 0xe2 && b1 == 0x81 && b2 == 0x9f) return 3;  // U+205F
  if (b0 == 0xe3 && b1 == 0x80 && b2 == 0x80) return 3;  // U+3000
  return 0;
}

bool is_token_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

constexpr std::array<std::string_view, 64> kStopwords = {
    "a",     "about", "also",  "an",    "and",   "are",   "as",    "at",
    "be",    "been",  "but",   "by",    "can",   "could", "do",    "for",
    "from",  "had",   "has",   "have",  "how",   "i",     "in",    "into",
    "is",    "it",    "its",   "many",  "more",  "most",  "much",  "of",
    "on",    "or",    "our",   "out",   "should", "so",   "such",  "than",
    "that",  "the",   "their", "them",  "then",  "there", "these", "they",
    "this",  "those", "to",    "very",  "was",   "we",    "were",  "what",
    "when",  "where", "which", "while", "who",   "will",  "with",  "would",
};

}  // namespace

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < s.size()) {
    if (std::size_t w = whitespace_length(s, i); w > 0) {
      pending_space = !out.empty();
      i += w;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> sentences;
  std::string current;
  auto flush = [&] {
    auto norm = normalize_whitespace(current);
    if (!norm.empty()) sentences.push_back(std::move(norm));
    current.clear();
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '\n') {
      // Blank line (optionally with spaces) ends a sentence.
      std::size_t j = i + 1;
      while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\r')) ++j;
      if (j < s.size() && s[j] == '\n') {
        flush();
        i = j;
        continue;
      }
    }
    current.push_back(c);
    if (c == '.' || c == '!' || c == '?') {
      if (i + 1 == s.size() || whitespace_length(s, i + 1) > 0) flush();
    }
  }
  flush();
  return sentences;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  const auto norm = normalize_whitespace(s);
  std::size_t start = 0;
  while (start < norm.size()) {
    auto end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    words.emplace_back(norm.substr(start, end - start));
    start = end + 1;
  }
  return words;
}

std::size_t word_count(std::string_view s) { return split_words(s).size(); }

std::string first_words(std::string_view s, std::size_t n) {
  const auto words = split_words(s);
  std::string out;
  for (std::size_t i = 0; i < std::min(n, words.size()); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

bool is_stopword(std::string_view token) {
  return std::find(kStopwords.begin(), kStopwords.end(), token) != kStopwords.end();
}

std::vector<std::string> content_tokens(std::string_view s) {
  auto tokens = tokenize(s);
  std::erase_if(tokens, [](const std::string& t) { return t.size() < 3 || is_stopword(t); });
  return tokens;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view s, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fill_template(std::string tmpl,
                          const std::vector<std::pair<std::string, std::string>>& values) {
  for (const auto& [key, value] : values) {
    const std::string needle = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = tmpl.find(needle, pos)) != std::string::npos) {
      tmpl.replace(pos, needle.size(), value);
      pos += value.size();
    }
  }
  return tmpl;
}

}  // namespace converge::text
