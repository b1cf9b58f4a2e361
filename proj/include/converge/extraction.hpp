#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "converge/corpus.hpp"
#include "converge/provider.hpp"

namespace converge {

enum class Nabc { Needs, Approach, Benefit, Competition };

char nabc_letter(Nabc n);
/// Accepts the letter or the full word ("N", "Needs", "benefit", ...).
std::optional<Nabc> parse_nabc(std::string_view s);

/// A NABC-labelled, quote-grounded opinion extracted from one presentation.
struct Viewpoint {
  std::string id;  // {DOMAIN}-{Pseudonym}-{index}
  std::string presentation_id;
  std::string presenter;
  std::string domain_code;
  int order_index = 0;  // of the presentation
  int index = 0;        // 1-based within the presentation
  std::string summary;
  Nabc nabc = Nabc::Needs;
  std::string quote;

  bool operator==(const Viewpoint&) const = default;
};

std::string make_viewpoint_id(std::string_view domain, std::string_view presenter, int index);

/// Provider output before grounding, kept for audit.
struct RawViewpoint {
  std::string presentation_id;
  std::string summary;
  std::string nabc;
  std::string quote;
  bool grounded = false;
  std::string reason;  // why it was dropped, empty if kept

  bool operator==(const RawViewpoint&) const = default;
};

enum class FlowKind { WithinCategory, CrossCategory };
enum class FlowStatus { Proposed, Accepted, Rejected };

std::string to_string(FlowKind k);
std::string to_string(FlowStatus s);
FlowKind parse_flow_kind(std::string_view s);
FlowStatus parse_flow_status(std::string_view s);

/// One side of a flow triplet: (opinion, presenter, NABC type).
struct FlowEndpoint {
  std::string viewpoint_id;
  std::string presenter;
  Nabc nabc = Nabc::Needs;

  bool operator==(const FlowEndpoint&) const = default;
};

struct FlowCandidate {
  FlowEndpoint source;
  FlowEndpoint target;
  FlowKind kind = FlowKind::WithinCategory;
  std::string reasoning;
  FlowStatus status = FlowStatus::Proposed;
  std::optional<double> confidence;

  std::string key() const { return source.viewpoint_id + "->" + target.viewpoint_id; }
  bool operator==(const FlowCandidate&) const = default;
};

struct ExtractionLimits {
  std::size_t max_viewpoints = 10;
  std::size_t max_summary_words = 10;
  int max_retries = 2;  // extra attempts after a provider or schema failure
  std::size_t max_flows_per_presenter = 20;
  std::size_t max_flows_per_kind = 10;
  std::uint64_t seed = 42;
};

struct GroundingResult {
  bool pass = false;
  std::string reason;
  explicit operator bool() const { return pass; }
};

/// Pass iff the whitespace-normalized quote occurs in the whitespace-normalized
/// transcript. Case-sensitive byte comparison.
GroundingResult verify_grounding(std::string_view quote, std::string_view transcript);
GroundingResult verify_grounding(const Viewpoint& viewpoint, std::string_view transcript);

struct ExtractionResult {
  std::string presentation_id;
  std::vector<Viewpoint> viewpoints;  // grounded, ids assigned
  std::vector<RawViewpoint> raw;
  std::vector<std::string> warnings;
};

/// Provider failures are retried, schema violations are re-prompted with a
/// repair instruction; both up to limits.max_retries extra attempts.
/// Ungrounded viewpoints are dropped with a warning.
ExtractionResult extract_viewpoints(const Presentation& presentation, Provider& provider,
                                    const ExtractionLimits& limits);

/// Runs extraction for every presentation, up to `threads` at a time. Results
/// come back in presentation order whatever the completion order.
std::vector<ExtractionResult> extract_corpus(const Corpus& corpus, Provider& provider,
                                             const ExtractionLimits& limits, unsigned threads = 1);

struct FlowInferenceResult {
  std::vector<FlowCandidate> flows;
  std::vector<std::string> log;  // rejected or truncated candidates
};

/// Asks the provider, once per presentation, for flows from its viewpoints to
/// viewpoints of later presentations. Only summaries, NABC labels and
/// presenter domains are sent. Backward, unknown, mislabelled and
/// reasoning-free candidates are rejected; duplicates collapse; per-presenter
/// caps are applied by confidence (then target id).
FlowInferenceResult infer_flows(const std::vector<Viewpoint>& viewpoints, Provider& provider,
                                const ExtractionLimits& limits);

/// Deterministic order: source (presentation, index), then target.
void sort_flows(std::vector<FlowCandidate>& flows, const std::vector<Viewpoint>& viewpoints);

void to_json(nlohmann::json& j, const Viewpoint& v);
void from_json(const nlohmann::json& j, Viewpoint& v);
void to_json(nlohmann::json& j, const RawViewpoint& v);
void from_json(const nlohmann::json& j, RawViewpoint& v);
void to_json(nlohmann::json& j, const FlowCandidate& f);
void from_json(const nlohmann::json& j, FlowCandidate& f);

}  // namespace converge
