#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace converge::text {

/// Collapses every run of Unicode whitespace into a single ASCII space and
/// trims both ends. Non-whitespace bytes are preserved exactly.
std::string normalize_whitespace(std::string_view s);

/// Splits running text into sentences at `.`, `!` or `?` followed by
/// whitespace, and at blank lines. Sentences are whitespace-normalized.
std::vector<std::string> split_sentences(std::string_view s);

/// Whitespace-separated words of `s`.
std::vector<std::string> split_words(std::string_view s);
std::size_t word_count(std::string_view s);

/// First `n` words joined by single spaces.
std::string first_words(std::string_view s, std::size_t n);

/// Lowercased ASCII-alphanumeric tokens. Bytes >= 0x80 are kept inside tokens.
std::vector<std::string> tokenize(std::string_view s);

/// tokenize() minus stopwords and tokens shorter than three characters.
std::vector<std::string> content_tokens(std::string_view s);

bool is_stopword(std::string_view token);

std::string to_lower_ascii(std::string_view s);

/// 64-bit FNV-1a. Stable across platforms, used for seeds and fingerprints.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t basis = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

/// Replaces `{key}` placeholders in a template.
std::string fill_template(std::string tmpl,
                          const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace converge::text
