#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "converge/extraction.hpp"
#include "converge/influence.hpp"
#include "converge/semantics.hpp"

namespace converge {

enum class Verdict { Pending, Agree, Disagree };
std::string to_string(Verdict v);
Verdict parse_verdict(std::string_view s);

/// One reviewer's vote on one survey item.
struct SurveyResponse {
  std::string item_id;
  std::string reviewer;
  Verdict verdict = Verdict::Pending;
  std::string comment;

  bool operator==(const SurveyResponse&) const = default;
};

struct SurveyItem {
  std::string id;  // "{source}->{target}"
  FlowEndpoint source;
  FlowEndpoint target;
  std::string source_text;
  std::string target_text;
  std::string direction;  // human-readable rendering of the triplet
  std::string reasoning;
  Verdict verdict = Verdict::Pending;  // majority of responses, ties -> disagree
  std::string comment;
  std::string reviewer;
  std::vector<SurveyResponse> responses;
};

struct Survey {
  std::vector<SurveyItem> items;
  std::vector<std::string> warnings;

  const SurveyItem* find(std::string_view id) const;
};

/// One pending item per distinct flow, ordered by source presentation and
/// source viewpoint index (then target). Throws ValidationError on a flow
/// whose endpoint is not among `viewpoints`.
Survey generate_survey(const std::vector<FlowCandidate>& flows, const std::vector<Viewpoint>& viewpoints);

struct DisagreementStats {
  std::size_t total_items = 0;
  std::size_t reviewed = 0;
  std::size_t disagreed = 0;

  /// 100 * disagreed / reviewed, unrounded; 0 when nothing is reviewed.
  double rate_percent() const;
  /// Rate rounded to two decimals, e.g. "7.83".
  std::string rate_text() const;
  double coverage_percent() const;
};

struct IngestResult {
  Survey survey;
  std::vector<FlowCandidate> flows;
  DisagreementStats stats;
};

/// Records responses, resolves each item by majority (ties count as
/// disagree), and marks agreed flows accepted and disagreed flows rejected.
/// Throws ValidationError on an unknown item, a pending verdict, or a second
/// vote by the same reviewer on the same item.
IngestResult ingest_responses(const Survey& survey, std::vector<FlowCandidate> flows,
                              const std::vector<SurveyResponse>& responses);

DisagreementStats disagreement_stats(const Survey& survey);

nlohmann::json survey_to_json(const Survey& survey);
Survey survey_from_json(const nlohmann::json& doc);
std::string render_survey_text(const Survey& survey);

/// Reads responses either from a `responses[]` array or from the verdicts
/// filled into an exported survey's `items[]`.
std::vector<SurveyResponse> responses_from_json(const nlohmann::json& doc);
nlohmann::json responses_to_json(const std::vector<SurveyResponse>& responses);

struct DomainLayerStat {
  std::string domain;
  std::optional<double> within_similarity;  // mean pairwise similarity inside the domain
  std::optional<double> mean_outward_ec;    // mean off-diagonal EC of the presenter row
  std::optional<double> within_flow_fraction;  // flows from the domain that stay in it
  std::size_t flows_from = 0;
};

struct ConsistencyReport {
  std::vector<DomainLayerStat> domains;
  std::optional<double> overall_within_flow_fraction;
  std::string top_similarity_domain;
  std::string top_ec_domain;
  std::string top_flow_domain;
  std::vector<std::string> statements;
  std::string corpus_fingerprint;
};

struct ReportLayers {
  const SimilarityMatrix* similarity = nullptr;
  const EcMatrix* ec = nullptr;
  const std::vector<FlowCandidate>* flows = nullptr;
  std::string flows_fingerprint;
  const std::vector<Viewpoint>* viewpoints = nullptr;
};

/// Recomputes every statistic from the given layers. Throws ValidationError
/// when the layers carry different corpus fingerprints.
ConsistencyReport consistency_report(const ReportLayers& layers);

nlohmann::json consistency_to_json(const ConsistencyReport& report);

}  // namespace converge
