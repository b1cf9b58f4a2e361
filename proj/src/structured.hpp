#pragma once
// Helpers shared by modules that talk to a Provider.

#include <string>

#include <json.hpp>

#include "converge/error.hpp"
#include "converge/extraction.hpp"
#include "converge/provider.hpp"
#include "converge/text.hpp"

namespace converge::detail {

using nlohmann::json;

inline json parse_structured(const std::string& raw) {
  // Tolerate markdown fences and chatter around the JSON object.
  const auto begin = raw.find('{');
  const auto end = raw.rfind('}');
  if (begin == std::string::npos || end == std::string::npos || end < begin)
    throw SchemaError("response contains no JSON object", raw);
  json doc = json::parse(raw.substr(begin, end - begin + 1), nullptr, false);
  if (doc.is_discarded()) throw SchemaError("response is not valid JSON", raw);
  return doc;
}

inline std::string string_field(const json& obj, const char* key, const std::string& raw) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_string())
    throw SchemaError(std::string("field '") + key + "' missing or not a string", raw);
  return obj[key].get<std::string>();
}

// Calls the provider and parses its answer, re-prompting on schema errors.
template <typename Parse>
auto complete_with_retries(Provider& provider, CompletionRequest request, int max_retries, Parse parse)
    -> decltype(parse(std::string{})) {
  const std::string base_instruction = request.instruction;
  for (int attempt = 0;; ++attempt) {
    std::string raw;
    try {
      raw = provider.complete(request);
    } catch (const ProviderError&) {
      if (attempt >= max_retries) throw;
      continue;
    }
    try {
      return parse(raw);
    } catch (const SchemaError& e) {
      if (attempt >= max_retries)
        throw SchemaError("schema violation after " + std::to_string(attempt + 1) + " attempt(s): " + e.what(),
                          raw);
      request.instruction = base_instruction + "\n\n" +
                            text::fill_template(prompt_template("repair"), {{"error", e.what()}, {"response", raw}});
    }
  }
}

inline std::string instruction_for(const std::string& task, const ExtractionLimits& limits) {
  return prompt_template("nabc_preamble") + "\n" +
         text::fill_template(prompt_template(task),
                             {{"max_viewpoints", std::to_string(limits.max_viewpoints)},
                              {"max_summary_words", std::to_string(limits.max_summary_words)},
                              {"max_flows_per_kind", std::to_string(limits.max_flows_per_kind)}});
}


}  // namespace converge::detail
