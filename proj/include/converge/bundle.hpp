#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "converge/config.hpp"
#include "converge/corpus.hpp"
#include "converge/extraction.hpp"
#include "converge/influence.hpp"
#include "converge/review.hpp"
#include "converge/semantics.hpp"
#include "converge/temporal.hpp"

namespace converge {

inline constexpr int kBundleVersion = 1;

/// An output directory holding one pipeline run. Every artifact is a plain
/// file; reading a missing or malformed one raises ValidationError.
class Bundle {
 public:
  explicit Bundle(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path path(std::string_view name) const { return root_ / std::string(name); }
  bool has(std::string_view name) const;

  nlohmann::json read_json(std::string_view name) const;
  void write_json(std::string_view name, const nlohmann::json& doc) const;
  void write_text(std::string_view name, std::string_view text) const;

  /// config.json, or defaults when the bundle has none yet.
  PipelineConfig config() const;
  Corpus corpus() const;
  std::vector<Viewpoint> viewpoints() const;
  /// Flows as inferred, before review.
  std::vector<FlowCandidate> proposed_flows() const;
  /// Corpus fingerprint the flows were inferred from.
  std::string flows_fingerprint() const;
  std::vector<SurveyResponse> responses() const;
  /// Proposed flows with the verdicts in responses.json applied.
  IngestResult review_state() const;
  SimilarityMatrix similarity() const;
  EcMatrix ec_matrix() const;

 private:
  std::filesystem::path root_;
};

/// Export documents. The CLI writes exactly these and the service serves
/// exactly these, so the two can never drift apart.
nlohmann::json export_meta(const PipelineConfig& config, const std::string& corpus_fingerprint);
nlohmann::json graph_export(const Bundle& bundle, double percentile, GraphMode mode);
nlohmann::json layout_export(const Bundle& bundle, std::uint64_t seed);
nlohmann::json flows_export(const Bundle& bundle, FlowSelector selector);
nlohmann::json ratio_export(const Bundle& bundle, FlowSelector selector);
nlohmann::json survey_export(const Bundle& bundle);
nlohmann::json consistency_export(const Bundle& bundle);

/// Stages. Each reads its inputs from the bundle, writes its outputs, and
/// returns the warnings it raised. Failures surface as StageError.
std::vector<std::string> stage_ingest(const Bundle& bundle, const std::filesystem::path& corpus_path,
                                      const PipelineConfig& config,
                                      const std::optional<std::filesystem::path>& pseudonyms = std::nullopt);
std::vector<std::string> stage_extract(const Bundle& bundle, Provider& provider, unsigned threads = 1);
std::vector<std::string> stage_flows(const Bundle& bundle, Provider& provider);
std::vector<std::string> stage_graph(const Bundle& bundle, Embedder& embedder,
                                     std::optional<double> percentile = std::nullopt,
                                     std::optional<GraphMode> mode = std::nullopt);
std::vector<std::string> stage_layout(const Bundle& bundle, std::optional<std::uint64_t> seed = std::nullopt);
std::vector<std::string> stage_influence(const Bundle& bundle, Embedder& embedder, Provider& provider,
                                         std::optional<double> theta_dom = std::nullopt);
std::vector<std::string> stage_temporal(const Bundle& bundle, std::optional<FlowSelector> selector = std::nullopt);
std::vector<std::string> stage_survey(const Bundle& bundle);
std::vector<std::string> stage_report(const Bundle& bundle);

/// Records reviewer responses in responses.json and refreshes the survey
/// files. A response identical to one already stored is skipped; any other
/// second vote by the same reviewer on the same item raises ConflictError.
IngestResult import_responses(const Bundle& bundle, const std::vector<SurveyResponse>& responses);

struct RunSummary {
  std::size_t presentations = 0;
  std::size_t viewpoints = 0;
  std::size_t flows = 0;
  std::vector<std::string> warnings;
};

/// Every stage in order, into `out`. Deterministic for a fixed config under
/// the mock backends.
RunSummary run_pipeline(const PipelineConfig& config, const std::filesystem::path& corpus_path,
                        const std::filesystem::path& out,
                        const std::optional<std::filesystem::path>& pseudonyms = std::nullopt);

}  // namespace converge
