#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "converge/extraction.hpp"
#include "converge/influence.hpp"
#include "converge/layout3d.hpp"
#include "converge/provider.hpp"
#include "converge/semantics.hpp"
#include "converge/temporal.hpp"

namespace converge {

enum class Backend { Mock, Http };
std::string to_string(Backend b);
Backend parse_backend(std::string_view s);

/// Every knob that changes pipeline output. Thread count is deliberately not
/// part of it: outputs are identical for any number of workers.
struct PipelineConfig {
  Backend provider = Backend::Mock;
  Backend embedding = Backend::Mock;
  AffinityBackend affinity = AffinityBackend::Embedding;
  double percentile = 90.0;
  GraphMode mode = GraphMode::Above;
  std::optional<double> theta_dom;  // unset: backend default
  bool embed_quotes = false;
  LayoutParams layout;
  FlowSelector flow_selector = FlowSelector::All;
  ExtractionLimits limits;
  std::uint64_t seed = 42;

  unsigned threads = 1;  // runtime only, not serialized

  /// Range checks on every field. Does not look at credentials.
  void validate() const;
};

nlohmann::json config_to_json(const PipelineConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& doc);
std::string config_fingerprint(const PipelineConfig& c);

/// Validates the config and, when a backend is `http`, that the provider
/// credentials are present in the environment. Runs before any stage.
void check_startup(const PipelineConfig& c);

std::unique_ptr<Provider> make_provider(const PipelineConfig& c);
std::unique_ptr<Embedder> make_embedder(const PipelineConfig& c);

}  // namespace converge
