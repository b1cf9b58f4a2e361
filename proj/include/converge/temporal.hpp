#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "converge/corpus.hpp"
#include "converge/extraction.hpp"

namespace converge {

/// `all` keeps accepted and not-yet-reviewed flows; `accepted` keeps only
/// flows an expert agreed with. Rejected flows never pass either.
enum class FlowSelector { All, Accepted };
std::string to_string(FlowSelector s);
FlowSelector parse_flow_selector(std::string_view s);

std::vector<FlowCandidate> select_flows(const std::vector<FlowCandidate>& flows, FlowSelector selector);

struct PresentationSlot {
  std::string id;
  int order_index = 0;
};

std::vector<PresentationSlot> presentation_slots(const Corpus& corpus);

struct FlowEdge {
  std::string source;
  std::string target;

  bool operator==(const FlowEdge&) const = default;
  auto operator<=>(const FlowEdge&) const = default;
};

/// Cumulative directed flow graph after presentations 1..t+1.
struct FlowGraph {
  int t = 0;
  std::string added_presentation;  // id of presentation t+1
  std::vector<std::string> nodes;
  std::vector<FlowEdge> edges;  // sorted, unique
  std::size_t n_new = 0;
  std::size_t e_new = 0;
};

/// G(1) .. G(n-1): G(t) holds the viewpoints of the first t+1 presentations
/// and the flows among them. Duplicate flows collapse to one edge. Throws
/// ValidationError for a flow with an unknown endpoint, a backward flow, or a
/// presentation without viewpoints.
std::vector<FlowGraph> build_cumulative_graphs(const std::vector<Viewpoint>& viewpoints,
                                               const std::vector<FlowCandidate>& flows,
                                               const std::vector<PresentationSlot>& presentations);

struct RatioEntry {
  int t = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  double ratio = 0.0;
  std::size_t n_new = 0;
  std::size_t e_new = 0;
  std::string presentation;
};

struct RatioSeries {
  std::vector<RatioEntry> entries;
};

/// r(t) = |E(t)| / |V(t)|, computed both incrementally from the previous
/// counts plus deltas and from scratch; the two must agree exactly.
RatioSeries ratio_series(const std::vector<FlowGraph>& graphs);

struct RatioDecrease {
  int step = 0;
  std::string presentation;
  double delta = 0.0;
};

struct TrendReport {
  std::vector<double> deltas;  // r(t) - r(t-1), from the second entry on
  std::vector<RatioDecrease> decreases;
  double slope = 0.0;  // least squares of r against t
  std::string verdict;
};

/// Needs at least two entries.
TrendReport trend_report(const RatioSeries& series);

std::string ratio_csv(const RatioSeries& series);
nlohmann::json ratio_to_json(const RatioSeries& series, const TrendReport* trend);
nlohmann::json flow_map_json(const std::vector<PresentationSlot>& presentations,
                             const std::vector<Viewpoint>& viewpoints, const std::vector<FlowCandidate>& flows);

}  // namespace converge
