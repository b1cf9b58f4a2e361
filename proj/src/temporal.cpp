#include "converge/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "converge/error.hpp"

namespace converge {

using nlohmann::json;

std::string to_string(FlowSelector s) { return s == FlowSelector::All ? "all" : "accepted"; }

FlowSelector parse_flow_selector(std::string_view s) {
  if (s == "all") return FlowSelector::All;
  if (s == "accepted") return FlowSelector::Accepted;
  throw ValidationError("flow selector must be 'all' or 'accepted'");
}

std::vector<FlowCandidate> select_flows(const std::vector<FlowCandidate>& flows, FlowSelector selector) {
  std::vector<FlowCandidate> out;
  for (const auto& f : flows) {
    if (f.status == FlowStatus::Rejected) continue;
    if (selector == FlowSelector::Accepted && f.status != FlowStatus::Accepted) continue;
    out.push_back(f);
  }
  return out;
}

std::vector<PresentationSlot> presentation_slots(const Corpus& corpus) {
  std::vector<PresentationSlot> slots;
  for (const auto& p : corpus.presentations) slots.push_back({p.id, p.order_index});
  return slots;
}

std::vector<FlowGraph> build_cumulative_graphs(const std::vector<Viewpoint>& viewpoints,
                                               const std::vector<FlowCandidate>& flows,
                                               const std::vector<PresentationSlot>& presentations) {
  auto slots = presentations;
  std::sort(slots.begin(), slots.end(),
            [](const PresentationSlot& a, const PresentationSlot& b) { return a.order_index < b.order_index; });

  std::map<std::string, std::size_t> position;  // presentation id -> 0-based slot
  for (std::size_t i = 0; i < slots.size(); ++i) position[slots[i].id] = i;

  std::vector<std::vector<std::string>> nodes_at(slots.size());
  std::map<std::string, std::size_t> slot_of;  // viewpoint id -> slot
  for (const auto& v : viewpoints) {
    auto it = position.find(v.presentation_id);
    if (it == position.end()) throw ValidationError("viewpoint of an unknown presentation", v.id);
    nodes_at[it->second].push_back(v.id);
    slot_of[v.id] = it->second;
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (nodes_at[i].empty()) throw ValidationError("presentation has no viewpoints", slots[i].id);
  }

  // Edges enter the graph with the later of their endpoints, i.e. the target.
  std::vector<std::set<FlowEdge>> edges_at(slots.size());
  for (const auto& f : flows) {
    auto s = slot_of.find(f.source.viewpoint_id);
    auto t = slot_of.find(f.target.viewpoint_id);
    if (s == slot_of.end()) throw ValidationError("flow references unknown viewpoint", f.source.viewpoint_id);
    if (t == slot_of.end()) throw ValidationError("flow references unknown viewpoint", f.target.viewpoint_id);
    if (t->second <= s->second) throw ValidationError("flow does not point forward in time", f.key());
    edges_at[t->second].insert({f.source.viewpoint_id, f.target.viewpoint_id});
  }

  std::vector<FlowGraph> graphs;
  if (slots.size() < 2) return graphs;
  FlowGraph g;
  g.nodes = nodes_at[0];
  g.edges.assign(edges_at[0].begin(), edges_at[0].end());  // always empty
  for (std::size_t i = 1; i < slots.size(); ++i) {
    g.t = static_cast<int>(i);
    g.added_presentation = slots[i].id;
    g.n_new = nodes_at[i].size();
    g.e_new = edges_at[i].size();
    g.nodes.insert(g.nodes.end(), nodes_at[i].begin(), nodes_at[i].end());
    g.edges.insert(g.edges.end(), edges_at[i].begin(), edges_at[i].end());
    std::sort(g.edges.begin(), g.edges.end());
    graphs.push_back(g);
  }
  return graphs;
}

RatioSeries ratio_series(const std::vector<FlowGraph>& graphs) {
  RatioSeries series;
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const auto& g = graphs[k];
    RatioEntry e;
    e.t = g.t;
    e.nodes = g.nodes.size();
    e.edges = g.edges.size();
    e.n_new = g.n_new;
    e.e_new = g.e_new;
    e.presentation = g.added_presentation;
    if (e.nodes == 0) throw ValidationError("cumulative graph has no nodes", g.added_presentation);
    e.ratio = static_cast<double>(e.edges) / static_cast<double>(e.nodes);

    if (k > 0) {
      const auto& prev = series.entries.back();
      if (prev.nodes > e.nodes || prev.edges > e.edges) throw ValidationError("graphs are not nested", g.added_presentation);
      const std::size_t inc_edges = prev.edges + g.e_new;
      const std::size_t inc_nodes = prev.nodes + g.n_new;
      // Incremental and batch ratios compared as fractions.
      if (inc_edges * e.nodes != e.edges * inc_nodes || inc_nodes != e.nodes)
        throw Error("incremental edge-to-node ratio disagrees with the batch ratio at t=" + std::to_string(g.t));
      if (static_cast<double>(inc_edges) / static_cast<double>(inc_nodes) != e.ratio)
        throw Error("incremental edge-to-node ratio disagrees with the batch ratio at t=" + std::to_string(g.t));
    }
    series.entries.push_back(std::move(e));
  }
  return series;
}

TrendReport trend_report(const RatioSeries& series) {
  const auto& es = series.entries;
  if (es.size() < 2) throw ValidationError("trend report needs at least two ratio entries");
  TrendReport report;
  for (std::size_t i = 1; i < es.size(); ++i) {
    const double d = es[i].ratio - es[i - 1].ratio;
    report.deltas.push_back(d);
    if (es[i].edges * es[i - 1].nodes < es[i - 1].edges * es[i].nodes)
      report.decreases.push_back({es[i].t, es[i].presentation, d});
  }
  double mean_t = 0.0, mean_r = 0.0;
  for (const auto& e : es) {
    mean_t += e.t;
    mean_r += e.ratio;
  }
  mean_t /= static_cast<double>(es.size());
  mean_r /= static_cast<double>(es.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& e : es) {
    sxy += (e.t - mean_t) * (e.ratio - mean_r);
    sxx += (e.t - mean_t) * (e.t - mean_t);
  }
  report.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  if (std::abs(report.slope) < 1e-12) {
    report.slope = 0.0;
    report.verdict = "no change";
  } else if (report.slope > 0.0) {
    report.verdict = report.decreases.empty() ? "converging" : "converging with temporary decreases";
  } else {
    report.verdict = "diverging";
  }
  return report;
}

std::string ratio_csv(const RatioSeries& series) {
  std::string out = "t,V,E,r\n";
  char buf[96];
  for (const auto& e : series.entries) {
    std::snprintf(buf, sizeof buf, "%d,%zu,%zu,%.6f\n", e.t, e.nodes, e.edges, e.ratio);
    out += buf;
  }
  return out;
}

json ratio_to_json(const RatioSeries& series, const TrendReport* trend) {
  json entries = json::array();
  for (const auto& e : series.entries) {
    entries.push_back({{"t", e.t},
                       {"V", e.nodes},
                       {"E", e.edges},
                       {"r", e.ratio},
                       {"n_new", e.n_new},
                       {"e_new", e.e_new},
                       {"presentation", e.presentation}});
  }
  json out = {{"entries", std::move(entries)}};
  if (trend) {
    json decreases = json::array();
    for (const auto& d : trend->decreases)
      decreases.push_back({{"step", d.step}, {"presentation", d.presentation}, {"delta", d.delta}});
    out["trend"] = {{"deltas", trend->deltas},
                    {"decreases", std::move(decreases)},
                    {"slope", trend->slope},
                    {"verdict", trend->verdict}};
  } else {
    out["trend"] = nullptr;
  }
  return out;
}

json flow_map_json(const std::vector<PresentationSlot>& presentations, const std::vector<Viewpoint>& viewpoints,
                   const std::vector<FlowCandidate>& flows) {
  json ps = json::array();
  for (const auto& p : presentations) ps.push_back({{"id", p.id}, {"order_index", p.order_index}});
  json nodes = json::array();
  for (const auto& v : viewpoints)
    nodes.push_back({{"id", v.id},
                     {"nabc", std::string(1, nabc_letter(v.nabc))},
                     {"presentation", v.presentation_id},
                     {"summary", v.summary}});
  json edges = json::array();
  for (const auto& f : flows)
    edges.push_back({{"source", f.source.viewpoint_id},
                     {"target", f.target.viewpoint_id},
                     {"kind", to_string(f.kind)},
                     {"reasoning", f.reasoning},
                     {"status", to_string(f.status)}});
  return {{"presentations", std::move(ps)}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

}  // namespace converge
