#include "converge/extraction.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <set>

#include "converge/error.hpp"
#include "converge/text.hpp"
#include "structured.hpp"

using converge::detail::complete_with_retries;
using converge::detail::instruction_for;
using converge::detail::parse_structured;
using converge::detail::string_field;

namespace converge {

using nlohmann::json;

char nabc_letter(Nabc n) {
  switch (n) {
    case Nabc::Needs: return 'N';
    case Nabc::Approach: return 'A';
    case Nabc::Benefit: return 'B';
    case Nabc::Competition: return 'C';
  }
  return '?';
}

std::optional<Nabc> parse_nabc(std::string_view s) {
  const auto t = text::to_lower_ascii(text::normalize_whitespace(s));
  if (t == "n" || t == "need" || t == "needs") return Nabc::Needs;
  if (t == "a" || t == "approach" || t == "approaches") return Nabc::Approach;
  if (t == "b" || t == "benefit" || t == "benefits") return Nabc::Benefit;
  if (t == "c" || t == "competition") return Nabc::Competition;
  return std::nullopt;
}

std::string make_viewpoint_id(std::string_view domain, std::string_view presenter, int index) {
  return std::string(domain) + "-" + std::string(presenter) + "-" + std::to_string(index);
}

std::string to_string(FlowKind k) {
  return k == FlowKind::WithinCategory ? "within_category" : "cross_category";
}

std::string to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Proposed: return "proposed";
    case FlowStatus::Accepted: return "accepted";
    case FlowStatus::Rejected: return "rejected";
  }
  return "proposed";
}

FlowKind parse_flow_kind(std::string_view s) {
  if (s == "within_category") return FlowKind::WithinCategory;
  if (s == "cross_category") return FlowKind::CrossCategory;
  throw ValidationError("unknown flow kind '" + std::string(s) + "'");
}

FlowStatus parse_flow_status(std::string_view s) {
  if (s == "proposed") return FlowStatus::Proposed;
  if (s == "accepted") return FlowStatus::Accepted;
  if (s == "rejected") return FlowStatus::Rejected;
  throw ValidationError("unknown flow status '" + std::string(s) + "'");
}

GroundingResult verify_grounding(std::string_view quote, std::string_view transcript) {
  const auto q = text::normalize_whitespace(quote);
  if (q.empty()) return {false, "empty quote"};
  if (text::normalize_whitespace(transcript).find(q) == std::string::npos) return {false, "quote not found"};
  return {true, {}};
}

GroundingResult verify_grounding(const Viewpoint& viewpoint, std::string_view transcript) {
  return verify_grounding(viewpoint.quote, transcript);
}


ExtractionResult extract_viewpoints(const Presentation& presentation, Provider& provider,
                                    const ExtractionLimits& limits) {
  ExtractionResult result;
  result.presentation_id = presentation.id;

  CompletionRequest request{instruction_for("extract_viewpoints", limits), presentation.transcript, limits.seed};
  auto raw_items = complete_with_retries(provider, request, limits.max_retries, [&](const std::string& raw) {
    const json doc = parse_structured(raw);
    if (!doc.contains("viewpoints") || !doc["viewpoints"].is_array())
      throw SchemaError("field 'viewpoints' missing or not an array", raw);
    std::vector<RawViewpoint> items;
    for (const auto& v : doc["viewpoints"]) {
      RawViewpoint r;
      r.presentation_id = presentation.id;
      r.summary = text::normalize_whitespace(string_field(v, "summary", raw));
      r.nabc = string_field(v, "nabc", raw);
      r.quote = text::normalize_whitespace(string_field(v, "quote", raw));
      if (r.summary.empty()) throw SchemaError("empty summary", raw);
      if (text::word_count(r.summary) > limits.max_summary_words)
        throw SchemaError("summary longer than " + std::to_string(limits.max_summary_words) + " words: '" +
                              r.summary + "'",
                          raw);
      if (!parse_nabc(r.nabc)) throw SchemaError("nabc label must be one of N, A, B, C: '" + r.nabc + "'", raw);
      items.push_back(std::move(r));
    }
    return items;
  });

  if (raw_items.size() > limits.max_viewpoints) {
    result.warnings.push_back(presentation.id + ": provider returned " + std::to_string(raw_items.size()) +
                              " viewpoints, keeping the first " + std::to_string(limits.max_viewpoints));
    raw_items.resize(limits.max_viewpoints);
  }

  int index = 0;
  for (auto& r : raw_items) {
    const auto check = verify_grounding(r.quote, presentation.transcript);
    r.grounded = check.pass;
    r.reason = check.reason;
    if (!check.pass) {
      result.warnings.push_back(presentation.id + ": dropped ungrounded viewpoint '" + r.summary +
                                "' (" + check.reason + ")");
    } else {
      Viewpoint v;
      v.index = ++index;
      v.id = make_viewpoint_id(presentation.domain_code, presentation.presenter, v.index);
      v.presentation_id = presentation.id;
      v.presenter = presentation.presenter;
      v.domain_code = presentation.domain_code;
      v.order_index = presentation.order_index;
      v.summary = r.summary;
      v.nabc = *parse_nabc(r.nabc);
      v.quote = r.quote;
      result.viewpoints.push_back(std::move(v));
    }
    result.raw.push_back(std::move(r));
  }
  if (result.viewpoints.empty()) result.warnings.push_back(presentation.id + ": no viewpoints extracted");
  return result;
}

std::vector<ExtractionResult> extract_corpus(const Corpus& corpus, Provider& provider,
                                             const ExtractionLimits& limits, unsigned threads) {
  const auto& ps = corpus.presentations;
  std::vector<ExtractionResult> results(ps.size());
  threads = std::max(1u, threads);
  for (std::size_t begin = 0; begin < ps.size(); begin += threads) {
    const std::size_t end = std::min(ps.size(), begin + threads);
    std::vector<std::future<ExtractionResult>> batch;
    for (std::size_t i = begin; i < end; ++i) {
      batch.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                 [&, i] { return extract_viewpoints(ps[i], provider, limits); }));
    }
    for (std::size_t i = begin; i < end; ++i) results[i] = batch[i - begin].get();
  }
  return results;
}

void sort_flows(std::vector<FlowCandidate>& flows, const std::vector<Viewpoint>& viewpoints) {
  std::map<std::string, std::pair<int, int>, std::less<>> pos;
  for (const auto& v : viewpoints) pos[v.id] = {v.order_index, v.index};
  auto rank = [&](const std::string& id) {
    auto it = pos.find(id);
    return it == pos.end() ? std::pair{0, 0} : it->second;
  };
  std::stable_sort(flows.begin(), flows.end(), [&](const FlowCandidate& a, const FlowCandidate& b) {
    const auto ka = std::tuple{rank(a.source.viewpoint_id), a.source.viewpoint_id, rank(a.target.viewpoint_id),
                               a.target.viewpoint_id};
    const auto kb = std::tuple{rank(b.source.viewpoint_id), b.source.viewpoint_id, rank(b.target.viewpoint_id),
                               b.target.viewpoint_id};
    return ka < kb;
  });
}

namespace {

json flow_view(const Viewpoint& v) {
  return {{"id", v.id},
          {"summary", v.summary},
          {"nabc", std::string(1, nabc_letter(v.nabc))},
          {"presenter", v.presenter},
          {"domain", v.domain_code},
          {"presentation", v.order_index}};
}

struct RawFlow {
  std::string source, target, kind, reasoning;
  std::optional<double> confidence;
};

}  // namespace

FlowInferenceResult infer_flows(const std::vector<Viewpoint>& viewpoints, Provider& provider,
                                const ExtractionLimits& limits) {
  FlowInferenceResult result;
  std::map<int, std::vector<const Viewpoint*>> by_order;
  std::map<std::string, const Viewpoint*> by_id;
  for (const auto& v : viewpoints) {
    by_order[v.order_index].push_back(&v);
    by_id[v.id] = &v;
  }
  if (by_order.size() < 2) return result;

  const std::string instruction = instruction_for("infer_flows", limits);
  std::vector<FlowCandidate> accepted;
  std::set<std::string> seen;

  for (const auto& [order, sources] : by_order) {
    json input = {{"source", json::array()}, {"candidates", json::array()}};
    for (const auto* v : sources) input["source"].push_back(flow_view(*v));
    for (const auto& [later, targets] : by_order) {
      if (later <= order) continue;
      for (const auto* v : targets) input["candidates"].push_back(flow_view(*v));
    }
    if (input["candidates"].empty()) continue;

    const auto raw_flows = complete_with_retries(
        provider, CompletionRequest{instruction, input.dump(), limits.seed}, limits.max_retries,
        [](const std::string& raw) {
          const json doc = parse_structured(raw);
          if (!doc.contains("flows") || !doc["flows"].is_array())
            throw SchemaError("field 'flows' missing or not an array", raw);
          std::vector<RawFlow> out;
          for (const auto& f : doc["flows"]) {
            RawFlow r{string_field(f, "source", raw), string_field(f, "target", raw), string_field(f, "kind", raw),
                      string_field(f, "reasoning", raw), std::nullopt};
            if (f.contains("confidence") && !f["confidence"].is_null()) {
              if (!f["confidence"].is_number()) throw SchemaError("field 'confidence' is not a number", raw);
              r.confidence = f["confidence"].get<double>();
            }
            out.push_back(std::move(r));
          }
          return out;
        });

    for (const auto& r : raw_flows) {
      const std::string label = r.source + "->" + r.target;
      auto s = by_id.find(r.source);
      auto t = by_id.find(r.target);
      if (s == by_id.end() || t == by_id.end()) {
        result.log.push_back("rejected " + label + ": unknown viewpoint");
        continue;
      }
      const Viewpoint& src = *s->second;
      const Viewpoint& dst = *t->second;
      if (src.order_index != order) {
        result.log.push_back("rejected " + label + ": source outside the requested presentation");
        continue;
      }
      if (dst.order_index < src.order_index) {
        result.log.push_back("rejected " + label + ": backward flow");
        continue;
      }
      if (dst.order_index == src.order_index) {
        result.log.push_back("rejected " + label + ": flow within one presentation");
        continue;
      }
      const FlowKind expected = src.nabc == dst.nabc ? FlowKind::WithinCategory : FlowKind::CrossCategory;
      if (r.kind != to_string(expected)) {
        result.log.push_back("rejected " + label + ": kind '" + r.kind + "' contradicts NABC labels " +
                             nabc_letter(src.nabc) + "/" + nabc_letter(dst.nabc));
        continue;
      }
      if (text::normalize_whitespace(r.reasoning).empty()) {
        result.log.push_back("rejected " + label + ": missing reasoning");
        continue;
      }
      if (!seen.insert(label).second) {
        result.log.push_back("collapsed duplicate " + label);
        continue;
      }
      FlowCandidate fc;
      fc.source = {src.id, src.presenter, src.nabc};
      fc.target = {dst.id, dst.presenter, dst.nabc};
      fc.kind = expected;
      fc.reasoning = r.reasoning;
      fc.confidence = r.confidence;
      accepted.push_back(std::move(fc));
    }
  }

  // Per-presenter caps, highest confidence first, ties by target id.
  auto better = [](const FlowCandidate& a, const FlowCandidate& b) {
    const double ca = a.confidence.value_or(0.0), cb = b.confidence.value_or(0.0);
    if (ca != cb) return ca > cb;
    if (a.target.viewpoint_id != b.target.viewpoint_id) return a.target.viewpoint_id < b.target.viewpoint_id;
    return a.source.viewpoint_id < b.source.viewpoint_id;
  };
  std::map<std::string, std::vector<FlowCandidate>> by_presenter;
  for (auto& f : accepted) by_presenter[f.source.presenter].push_back(std::move(f));
  for (auto& [presenter, flows] : by_presenter) {
    std::stable_sort(flows.begin(), flows.end(), better);
    std::size_t within = 0, cross = 0;
    std::vector<FlowCandidate> kept;
    for (auto& f : flows) {
      auto& count = f.kind == FlowKind::WithinCategory ? within : cross;
      if (count >= limits.max_flows_per_kind || kept.size() >= limits.max_flows_per_presenter) {
        result.log.push_back("truncated " + f.key() + ": per-presenter cap for " + presenter);
        continue;
      }
      ++count;
      kept.push_back(std::move(f));
    }
    for (auto& f : kept) result.flows.push_back(std::move(f));
  }
  sort_flows(result.flows, viewpoints);
  return result;
}

void to_json(json& j, const Viewpoint& v) {
  j = {{"id", v.id},
       {"presentation_id", v.presentation_id},
       {"presenter", v.presenter},
       {"domain", v.domain_code},
       {"order_index", v.order_index},
       {"index", v.index},
       {"summary", v.summary},
       {"nabc", std::string(1, nabc_letter(v.nabc))},
       {"quote", v.quote}};
}

void from_json(const json& j, Viewpoint& v) {
  v.id = j.at("id").get<std::string>();
  v.presentation_id = j.at("presentation_id").get<std::string>();
  v.presenter = j.at("presenter").get<std::string>();
  v.domain_code = j.at("domain").get<std::string>();
  v.order_index = j.at("order_index").get<int>();
  v.index = j.at("index").get<int>();
  v.summary = j.at("summary").get<std::string>();
  const auto label = parse_nabc(j.at("nabc").get<std::string>());
  if (!label) throw ValidationError("invalid nabc label", v.id);
  v.nabc = *label;
  v.quote = j.at("quote").get<std::string>();
}

void to_json(json& j, const RawViewpoint& v) {
  j = {{"presentation_id", v.presentation_id}, {"summary", v.summary}, {"nabc", v.nabc},
       {"quote", v.quote},                     {"grounded", v.grounded}, {"reason", v.reason}};
}

void from_json(const json& j, RawViewpoint& v) {
  v.presentation_id = j.at("presentation_id").get<std::string>();
  v.summary = j.at("summary").get<std::string>();
  v.nabc = j.at("nabc").get<std::string>();
  v.quote = j.at("quote").get<std::string>();
  v.grounded = j.at("grounded").get<bool>();
  v.reason = j.value("reason", "");
}

namespace {

json endpoint_json(const FlowEndpoint& e) {
  return {{"viewpoint_id", e.viewpoint_id}, {"presenter", e.presenter}, {"nabc", std::string(1, nabc_letter(e.nabc))}};
}

FlowEndpoint endpoint_from(const json& j) {
  FlowEndpoint e;
  e.viewpoint_id = j.at("viewpoint_id").get<std::string>();
  e.presenter = j.at("presenter").get<std::string>();
  const auto label = parse_nabc(j.at("nabc").get<std::string>());
  if (!label) throw ValidationError("invalid nabc label", e.viewpoint_id);
  e.nabc = *label;
  return e;
}

}  // namespace

void to_json(json& j, const FlowCandidate& f) {
  j = {{"source", endpoint_json(f.source)},
       {"target", endpoint_json(f.target)},
       {"kind", to_string(f.kind)},
       {"reasoning", f.reasoning},
       {"status", to_string(f.status)},
       {"confidence", f.confidence ? json(*f.confidence) : json(nullptr)}};
}

void from_json(const json& j, FlowCandidate& f) {
  f.source = endpoint_from(j.at("source"));
  f.target = endpoint_from(j.at("target"));
  f.kind = parse_flow_kind(j.at("kind").get<std::string>());
  f.reasoning = j.at("reasoning").get<std::string>();
  f.status = parse_flow_status(j.value("status", "proposed"));
  if (j.contains("confidence") && !j["confidence"].is_null()) f.confidence = j["confidence"].get<double>();
  else f.confidence.reset();
}

}  // namespace converge
