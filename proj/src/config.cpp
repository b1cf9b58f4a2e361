#include "converge/config.hpp"

#include <set>

#include "converge/corpus.hpp"
#include "converge/error.hpp"
#include "converge/http_provider.hpp"
#include "converge/text.hpp"

namespace converge {

using nlohmann::json;

std::string to_string(Backend b) { return b == Backend::Mock ? "mock" : "http"; }

Backend parse_backend(std::string_view s) {
  if (s == "mock") return Backend::Mock;
  if (s == "http") return Backend::Http;
  throw ValidationError("backend must be mock or http: '" + std::string(s) + "'");
}

void PipelineConfig::validate() const {
  if (!(percentile > 0.0 && percentile < 100.0)) throw ValidationError("percentile must be in (0, 100)");
  if (theta_dom && !(*theta_dom >= -1.0 && *theta_dom <= 1.0)) throw ValidationError("theta_dom must be in [-1, 1]");
  if (limits.max_viewpoints == 0 || limits.max_summary_words == 0)
    throw ValidationError("extraction limits must be positive");
  if (limits.max_retries < 0) throw ValidationError("max_retries must be non-negative");
  if (threads == 0) throw ValidationError("threads must be at least 1");
  layout.validate();
}

json config_to_json(const PipelineConfig& c) {
  auto layout = layout_params_to_json(c.layout);
  layout.erase("seed");
  return {{"provider", to_string(c.provider)},
          {"embedding", to_string(c.embedding)},
          {"affinity", to_string(c.affinity)},
          {"percentile", c.percentile},
          {"mode", to_string(c.mode)},
          {"theta_dom", c.theta_dom ? json(*c.theta_dom) : json(nullptr)},
          {"embed_quotes", c.embed_quotes},
          {"layout", layout},
          {"flow_selector", to_string(c.flow_selector)},
          {"limits",
           {{"max_viewpoints", c.limits.max_viewpoints},
            {"max_summary_words", c.limits.max_summary_words},
            {"max_retries", c.limits.max_retries},
            {"max_flows_per_presenter", c.limits.max_flows_per_presenter},
            {"max_flows_per_kind", c.limits.max_flows_per_kind}}},
          {"seed", c.seed}};
}

PipelineConfig config_from_json(const json& doc) {
  static const std::set<std::string> known = {"provider", "embedding", "affinity", "percentile",
                                              "mode", "theta_dom", "embed_quotes", "layout",
                                              "flow_selector", "limits", "seed"};
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (!known.count(key)) throw ValidationError("unknown config key", key);

  PipelineConfig c;
  try {
    if (doc.contains("provider")) c.provider = parse_backend(doc["provider"].get<std::string>());
    if (doc.contains("embedding")) c.embedding = parse_backend(doc["embedding"].get<std::string>());
    if (doc.contains("affinity")) c.affinity = parse_affinity_backend(doc["affinity"].get<std::string>());
    if (doc.contains("percentile")) c.percentile = doc["percentile"].get<double>();
    if (doc.contains("mode")) c.mode = parse_graph_mode(doc["mode"].get<std::string>());
    if (doc.contains("theta_dom") && !doc["theta_dom"].is_null()) c.theta_dom = doc["theta_dom"].get<double>();
    if (doc.contains("embed_quotes")) c.embed_quotes = doc["embed_quotes"].get<bool>();
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("layout")) {
      json merged = layout_params_to_json(c.layout);
      merged.update(doc["layout"]);
      c.layout = layout_params_from_json(merged);
    }
    if (doc.contains("flow_selector")) c.flow_selector = parse_flow_selector(doc["flow_selector"].get<std::string>());
    if (doc.contains("limits")) {
      const auto& l = doc["limits"];
      c.limits.max_viewpoints = l.value("max_viewpoints", c.limits.max_viewpoints);
      c.limits.max_summary_words = l.value("max_summary_words", c.limits.max_summary_words);
      c.limits.max_retries = l.value("max_retries", c.limits.max_retries);
      c.limits.max_flows_per_presenter = l.value("max_flows_per_presenter", c.limits.max_flows_per_presenter);
      c.limits.max_flows_per_kind = l.value("max_flows_per_kind", c.limits.max_flows_per_kind);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  c.layout.seed = c.seed;
  c.limits.seed = c.seed;
  c.validate();
  return c;
}

std::string config_fingerprint(const PipelineConfig& c) { return text::hex64(text::fnv1a64(config_to_json(c).dump())); }

void check_startup(const PipelineConfig& c) {
  c.validate();
  if (c.provider == Backend::Http || c.embedding == Backend::Http) {
    std::string why;
    if (!HttpProviderConfig::from_env(&why)) throw ValidationError("http backend selected but " + why);
  }
}

std::unique_ptr<Provider> make_provider(const PipelineConfig& c) {
  if (c.provider == Backend::Mock) return std::make_unique<MockProvider>();
  std::string why;
  auto cfg = HttpProviderConfig::from_env(&why);
  if (!cfg) throw ValidationError("http provider selected but " + why);
  return std::make_unique<HttpProvider>(*cfg);
}

std::unique_ptr<Embedder> make_embedder(const PipelineConfig& c) {
  if (c.embedding == Backend::Mock) return std::make_unique<MockEmbedder>(c.seed);
  std::string why;
  auto cfg = HttpProviderConfig::from_env(&why);
  if (!cfg) throw ValidationError("http embedding selected but " + why);
  return std::make_unique<HttpEmbedder>(*cfg);
}

}  // namespace converge
