#include "converge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "converge/error.hpp"
#include "converge/text.hpp"

namespace converge {

using nlohmann::json;

const Domain* Corpus::find_domain(std::string_view code) const {
  for (const auto& d : domains)
    if (d.code == code) return &d;
  return nullptr;
}

const Presentation* Corpus::find_presentation(std::string_view id) const {
  for (const auto& p : presentations)
    if (p.id == id) return &p;
  return nullptr;
}

std::vector<std::string> Corpus::domain_codes() const {
  std::vector<std::string> codes;
  codes.reserve(domains.size());
  for (const auto& d : domains) codes.push_back(d.code);
  return codes;
}

std::vector<Domain> default_domain_registry() {
  return {
      {"PSS", "Participatory Social Science",
       {"participatory", "community engagement", "stakeholders", "ethnography", "social"}},
      {"WT", "Water (Treatment) Technology",
       {"treatment", "filtration", "contaminants", "water quality", "technology"}},
      {"WL", "Water Law", {"law", "rights", "regulation", "policy", "legal"}},
      {"CR", "Community Research", {"community", "residents", "households", "survey", "rural"}},
      {"DS", "Data Science", {"data", "models", "geospatial", "analytics", "machine learning"}},
      {"SSH", "Social Science & Hydrology",
       {"hydrology", "groundwater", "land use", "water resources", "modeling"}},
  };
}

void validate_corpus(Corpus& corpus) {
  static const std::regex code_re("[A-Z]{2,4}");
  std::set<std::string> codes;
  for (const auto& d : corpus.domains) {
    if (!std::regex_match(d.code, code_re))
      throw ValidationError("domain code must match [A-Z]{2,4}", d.code);
    if (!codes.insert(d.code).second) throw ValidationError("duplicate domain code", d.code);
    if (d.keywords.empty()) throw ValidationError("domain has an empty keyword bag", d.code);
    for (const auto& k : d.keywords)
      if (text::normalize_whitespace(k).empty()) throw ValidationError("blank keyword", d.code);
  }

  std::set<std::string> ids;
  std::set<int> orders;
  for (const auto& p : corpus.presentations) {
    if (p.id.empty()) throw ValidationError("presentation id is empty");
    if (!ids.insert(p.id).second) throw ValidationError("duplicate presentation id", p.id);
    if (!orders.insert(p.order_index).second) throw ValidationError("duplicate order_index", p.id);
    if (!codes.count(p.domain_code)) throw ValidationError("unknown domain_code " + p.domain_code, p.id);
    if (p.presenter.empty()) throw ValidationError("presenter is empty", p.id);
    if (text::normalize_whitespace(p.transcript).empty()) throw ValidationError("transcript is empty", p.id);
  }

  std::stable_sort(corpus.presentations.begin(), corpus.presentations.end(),
                   [](const Presentation& a, const Presentation& b) { return a.order_index < b.order_index; });
  for (std::size_t i = 0; i < corpus.presentations.size(); ++i) {
    if (corpus.presentations[i].order_index != static_cast<int>(i) + 1)
      throw ValidationError("order_index values must form the sequence 1..n", corpus.presentations[i].id);
  }
}

namespace {

template <typename T>
T require(const json& obj, const char* key, const std::string& record) {
  if (!obj.is_object() || !obj.contains(key))
    throw ValidationError(std::string("missing field '") + key + "'", record);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type", record);
  }
}

}  // namespace

Corpus corpus_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("corpus document must be a JSON object");
  if (!doc.contains("domains") || !doc["domains"].is_array())
    throw ValidationError("corpus document needs a 'domains' array");
  if (!doc.contains("presentations") || !doc["presentations"].is_array())
    throw ValidationError("corpus document needs a 'presentations' array");

  Corpus c;
  for (std::size_t i = 0; i < doc["domains"].size(); ++i) {
    const auto& d = doc["domains"][i];
    const std::string record = d.is_object() && d.contains("code") && d["code"].is_string()
                                   ? d["code"].get<std::string>()
                                   : "domains[" + std::to_string(i) + "]";
    c.domains.push_back({require<std::string>(d, "code", record), require<std::string>(d, "name", record),
                         require<std::vector<std::string>>(d, "keywords", record)});
  }
  for (std::size_t i = 0; i < doc["presentations"].size(); ++i) {
    const auto& p = doc["presentations"][i];
    const std::string record = p.is_object() && p.contains("id") && p["id"].is_string()
                                   ? p["id"].get<std::string>()
                                   : "presentations[" + std::to_string(i) + "]";
    c.presentations.push_back({require<std::string>(p, "id", record), require<int>(p, "order_index", record),
                               require<std::string>(p, "presenter", record),
                               require<std::string>(p, "domain_code", record),
                               require<std::string>(p, "transcript", record)});
  }
  if (doc.contains("metadata")) {
    if (!doc["metadata"].is_object()) throw ValidationError("'metadata' must be an object");
    c.metadata = doc["metadata"];
  }
  validate_corpus(c);
  return c;
}

json corpus_to_json(const Corpus& corpus) {
  json doc;
  doc["domains"] = json::array();
  for (const auto& d : corpus.domains)
    doc["domains"].push_back({{"code", d.code}, {"name", d.name}, {"keywords", d.keywords}});
  doc["presentations"] = json::array();
  for (const auto& p : corpus.presentations)
    doc["presentations"].push_back({{"id", p.id},
                                    {"order_index", p.order_index},
                                    {"presenter", p.presenter},
                                    {"domain_code", p.domain_code},
                                    {"transcript", p.transcript}});
  doc["metadata"] = corpus.metadata;
  return doc;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

Corpus load_corpus(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("corpus file not found", path.string());
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed corpus document: ") + e.what(), path.string());
  }
  return corpus_from_json(doc);
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  write_file(path, dump_json(corpus_to_json(corpus)));
}

PseudonymMap load_pseudonym_map(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed pseudonym map: ") + e.what(), path.string());
  }
  if (!doc.is_object()) throw ValidationError("pseudonym map must be a JSON object", path.string());
  PseudonymMap m;
  for (const auto& [k, v] : doc.items()) {
    if (!v.is_string()) throw ValidationError("pseudonym must be a string", k);
    m[k] = v.get<std::string>();
  }
  return m;
}

Corpus pseudonymize(const Corpus& corpus, const PseudonymMap& mapping) {
  std::map<std::string, std::string> owner;  // pseudonym -> presenter
  for (const auto& [presenter, pseudonym] : mapping) {
    if (pseudonym.empty()) throw ValidationError("empty pseudonym", presenter);
    auto [it, inserted] = owner.emplace(pseudonym, presenter);
    if (!inserted)
      throw ValidationError("pseudonym collision: '" + it->second + "' and '" + presenter + "' both map to '" +
                                pseudonym + "'",
                            pseudonym);
  }

  for (const auto& [pseudonym, presenter] : owner) {
    if (mapping.count(pseudonym) && mapping.at(pseudonym) != pseudonym)
      throw ValidationError("pseudonym '" + pseudonym + "' is also mapped as a presenter name", presenter);
  }

  std::set<std::string> unmapped;
  for (const auto& p : corpus.presentations) {
    if (!mapping.count(p.presenter) && !owner.count(p.presenter)) unmapped.insert(p.presenter);
  }
  if (!unmapped.empty()) {
    std::string list;
    for (const auto& u : unmapped) list += (list.empty() ? "" : ", ") + u;
    throw ValidationError("unmapped presenter(s): " + list, *unmapped.begin());
  }

  Corpus out = corpus;
  for (auto& p : out.presentations) {
    if (auto it = mapping.find(p.presenter); it != mapping.end()) p.presenter = it->second;
  }
  return out;
}

std::string corpus_fingerprint(const Corpus& corpus) {
  return text::hex64(text::fnv1a64(corpus_to_json(corpus).dump()));
}

}  // namespace converge
