#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace converge {

/// A research domain and the bag of keywords that represents it.
struct Domain {
  std::string code;  // [A-Z]{2,4}
  std::string name;
  std::vector<std::string> keywords;

  bool operator==(const Domain&) const = default;
};

struct Presentation {
  std::string id;
  int order_index = 0;  // 1-based chronological position
  std::string presenter;
  std::string domain_code;
  std::string transcript;  // may include the discussion that followed

  bool operator==(const Presentation&) const = default;
};

/// Immutable after load; safe to share read-only between workers.
struct Corpus {
  std::vector<Domain> domains;
  std::vector<Presentation> presentations;  // sorted by order_index
  nlohmann::json metadata = nlohmann::json::object();

  const Domain* find_domain(std::string_view code) const;
  const Presentation* find_presentation(std::string_view id) const;
  std::vector<std::string> domain_codes() const;

  bool operator==(const Corpus&) const = default;
};

/// presenter name -> pseudonym
using PseudonymMap = std::map<std::string, std::string>;

/// The six domain codes of the original water-security team. Only a
/// convenience default: corpora carry their own registry.
std::vector<Domain> default_domain_registry();

/// Sorts presentations by order_index and checks every invariant.
/// Throws ValidationError naming the offending record.
void validate_corpus(Corpus& corpus);

Corpus corpus_from_json(const nlohmann::json& doc);
nlohmann::json corpus_to_json(const Corpus& corpus);

Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

PseudonymMap load_pseudonym_map(const std::filesystem::path& path);

/// Replaces every presenter with its pseudonym. Presenters that already carry
/// a pseudonym from the map are left alone, which makes the call idempotent.
Corpus pseudonymize(const Corpus& corpus, const PseudonymMap& mapping);

/// Content hash of the canonical JSON form. Layers computed from the same
/// corpus carry the same fingerprint.
std::string corpus_fingerprint(const Corpus& corpus);

/// Reads a whole file; throws ValidationError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Canonical JSON text used for every file and HTTP body the engine emits.
std::string dump_json(const nlohmann::json& doc);

}  // namespace converge
