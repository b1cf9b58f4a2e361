#include "converge/review.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "converge/error.hpp"

namespace converge {

using nlohmann::json;

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pending: return "pending";
    case Verdict::Agree: return "agree";
    case Verdict::Disagree: return "disagree";
  }
  return "pending";
}

Verdict parse_verdict(std::string_view s) {
  if (s == "pending") return Verdict::Pending;
  if (s == "agree") return Verdict::Agree;
  if (s == "disagree") return Verdict::Disagree;
  throw ValidationError("verdict must be pending, agree or disagree: '" + std::string(s) + "'");
}

const SurveyItem* Survey::find(std::string_view id) const {
  for (const auto& item : items)
    if (item.id == id) return &item;
  return nullptr;
}

namespace {

std::string endpoint_label(const FlowEndpoint& e) {
  return "(" + e.viewpoint_id + ", " + e.presenter + ", " + std::string(1, nabc_letter(e.nabc)) + ")";
}

std::string render_opinion(const Viewpoint& v) { return v.summary + "\nQuote: \"" + v.quote + "\""; }

}  // namespace

Survey generate_survey(const std::vector<FlowCandidate>& flows, const std::vector<Viewpoint>& viewpoints) {
  std::map<std::string, const Viewpoint*> by_id;
  for (const auto& v : viewpoints) by_id[v.id] = &v;

  std::vector<FlowCandidate> unique;
  std::set<std::string> seen;
  for (const auto& f : flows) {
    if (!by_id.count(f.source.viewpoint_id)) throw ValidationError("dangling flow reference", f.source.viewpoint_id);
    if (!by_id.count(f.target.viewpoint_id)) throw ValidationError("dangling flow reference", f.target.viewpoint_id);
    if (seen.insert(f.key()).second) unique.push_back(f);
  }
  sort_flows(unique, viewpoints);

  Survey survey;
  for (const auto& f : unique) {
    SurveyItem item;
    item.id = f.key();
    item.source = f.source;
    item.target = f.target;
    item.source_text = render_opinion(*by_id[f.source.viewpoint_id]);
    item.target_text = render_opinion(*by_id[f.target.viewpoint_id]);
    item.direction = endpoint_label(f.source) + " -> " + endpoint_label(f.target);
    item.reasoning = f.reasoning;
    survey.items.push_back(std::move(item));
  }
  if (survey.items.empty()) survey.warnings.push_back("no flows to review");
  return survey;
}

double DisagreementStats::rate_percent() const {
  return reviewed == 0 ? 0.0 : 100.0 * static_cast<double>(disagreed) / static_cast<double>(reviewed);
}

std::string DisagreementStats::rate_text() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", rate_percent());
  return buf;
}

double DisagreementStats::coverage_percent() const {
  return total_items == 0 ? 0.0 : 100.0 * static_cast<double>(reviewed) / static_cast<double>(total_items);
}

DisagreementStats disagreement_stats(const Survey& survey) {
  DisagreementStats s;
  s.total_items = survey.items.size();
  for (const auto& item : survey.items) {
    if (item.verdict == Verdict::Pending) continue;
    ++s.reviewed;
    if (item.verdict == Verdict::Disagree) ++s.disagreed;
  }
  return s;
}

namespace {

void resolve(SurveyItem& item) {
  std::size_t agree = 0, disagree = 0;
  std::string reviewers, comments;
  for (const auto& r : item.responses) {
    (r.verdict == Verdict::Agree ? agree : disagree)++;
    reviewers += (reviewers.empty() ? "" : ", ") + r.reviewer;
    if (!r.comment.empty()) comments += (comments.empty() ? "" : " | ") + r.comment;
  }
  if (agree + disagree == 0) item.verdict = Verdict::Pending;
  else item.verdict = agree > disagree ? Verdict::Agree : Verdict::Disagree;
  item.reviewer = reviewers;
  item.comment = comments;
}

}  // namespace

IngestResult ingest_responses(const Survey& survey, std::vector<FlowCandidate> flows,
                              const std::vector<SurveyResponse>& responses) {
  IngestResult result{survey, std::move(flows), {}};
  std::map<std::string, std::size_t> index;
  std::set<std::pair<std::string, std::string>> voted;
  for (std::size_t i = 0; i < result.survey.items.size(); ++i) {
    index[result.survey.items[i].id] = i;
    for (const auto& r : result.survey.items[i].responses) voted.insert({r.item_id, r.reviewer});
  }

  // Validate the whole batch before touching anything.
  for (const auto& r : responses) {
    if (!index.count(r.item_id)) throw ValidationError("response references an unknown survey item", r.item_id);
    if (r.reviewer.empty()) throw ValidationError("response has no reviewer id", r.item_id);
    if (r.verdict == Verdict::Pending) throw ValidationError("response verdict must be agree or disagree", r.item_id);
    if (!voted.insert({r.item_id, r.reviewer}).second)
      throw ConflictError("duplicate response by reviewer " + r.reviewer, r.item_id);
  }
  for (const auto& r : responses) {
    auto& item = result.survey.items[index[r.item_id]];
    item.responses.push_back(r);
  }
  for (auto& item : result.survey.items) resolve(item);

  std::map<std::string, Verdict> verdicts;
  for (const auto& item : result.survey.items) verdicts[item.id] = item.verdict;
  for (auto& f : result.flows) {
    auto it = verdicts.find(f.key());
    if (it == verdicts.end() || it->second == Verdict::Pending) continue;
    f.status = it->second == Verdict::Agree ? FlowStatus::Accepted : FlowStatus::Rejected;
  }
  result.stats = disagreement_stats(result.survey);
  return result;
}

namespace {

json endpoint_json(const FlowEndpoint& e, const std::string& text) {
  return {{"viewpoint_id", e.viewpoint_id},
          {"presenter", e.presenter},
          {"nabc", std::string(1, nabc_letter(e.nabc))},
          {"text", text}};
}

FlowEndpoint endpoint_from(const json& j) {
  FlowEndpoint e;
  e.viewpoint_id = j.at("viewpoint_id").get<std::string>();
  e.presenter = j.value("presenter", "");
  const auto label = parse_nabc(j.value("nabc", "N"));
  if (!label) throw ValidationError("invalid nabc label", e.viewpoint_id);
  e.nabc = *label;
  return e;
}

}  // namespace

json responses_to_json(const std::vector<SurveyResponse>& responses) {
  json arr = json::array();
  for (const auto& r : responses)
    arr.push_back({{"item_id", r.item_id}, {"reviewer", r.reviewer}, {"verdict", to_string(r.verdict)}, {"comment", r.comment}});
  return {{"responses", std::move(arr)}};
}

json survey_to_json(const Survey& survey) {
  json items = json::array();
  for (const auto& item : survey.items) {
    json responses = responses_to_json(item.responses)["responses"];
    items.push_back({{"id", item.id},
                     {"source", endpoint_json(item.source, item.source_text)},
                     {"target", endpoint_json(item.target, item.target_text)},
                     {"direction", item.direction},
                     {"reasoning", item.reasoning},
                     {"verdict", to_string(item.verdict)},
                     {"comment", item.comment},
                     {"reviewer", item.reviewer},
                     {"responses", std::move(responses)}});
  }
  const auto stats = disagreement_stats(survey);
  return {{"items", std::move(items)},
          {"warnings", survey.warnings},
          {"stats",
           {{"total_items", stats.total_items},
            {"reviewed", stats.reviewed},
            {"disagreed", stats.disagreed},
            {"disagreement_rate", stats.rate_text()},
            {"coverage_percent", stats.coverage_percent()}}}};
}

Survey survey_from_json(const json& doc) {
  Survey s;
  for (const auto& j : doc.at("items")) {
    SurveyItem item;
    item.id = j.at("id").get<std::string>();
    item.source = endpoint_from(j.at("source"));
    item.target = endpoint_from(j.at("target"));
    item.source_text = j.at("source").value("text", "");
    item.target_text = j.at("target").value("text", "");
    item.direction = j.value("direction", "");
    item.reasoning = j.value("reasoning", "");
    if (j.contains("responses")) item.responses = responses_from_json(json{{"responses", j["responses"]}});
    resolve(item);
    s.items.push_back(std::move(item));
  }
  if (doc.contains("warnings")) s.warnings = doc["warnings"].get<std::vector<std::string>>();
  return s;
}

std::vector<SurveyResponse> responses_from_json(const json& doc) {
  std::vector<SurveyResponse> out;
  if (doc.contains("responses")) {
    for (const auto& r : doc.at("responses")) {
      out.push_back({r.at("item_id").get<std::string>(), r.value("reviewer", ""),
                     parse_verdict(r.at("verdict").get<std::string>()), r.value("comment", "")});
    }
    return out;
  }
  if (!doc.contains("items")) throw ValidationError("response document needs 'responses' or 'items'");
  for (const auto& item : doc.at("items")) {
    const auto id = item.at("id").get<std::string>();
    if (item.contains("responses") && !item["responses"].empty()) {
      for (const auto& r : item["responses"]) {
        out.push_back({id, r.value("reviewer", ""), parse_verdict(r.at("verdict").get<std::string>()),
                       r.value("comment", "")});
      }
      continue;
    }
    const auto verdict = parse_verdict(item.value("verdict", "pending"));
    if (verdict == Verdict::Pending) continue;
    out.push_back({id, item.value("reviewer", ""), verdict, item.value("comment", "")});
  }
  return out;
}

std::string render_survey_text(const Survey& survey) {
  std::ostringstream out;
  out << "Opinion flow review survey: " << survey.items.size() << " item(s)\n";
  out << "For each flow, answer agree or disagree and add a comment if useful.\n";
  std::size_t n = 0;
  for (const auto& item : survey.items) {
    out << "\n[" << ++n << "] " << item.id << "\n";
    out << "Direction: " << item.direction << "\n";
    out << "Source: " << item.source_text << "\n";
    out << "Target: " << item.target_text << "\n";
    out << "Reasoning: " << item.reasoning << "\n";
    out << "Verdict: " << to_string(item.verdict) << "\n";
  }
  return out.str();
}

ConsistencyReport consistency_report(const ReportLayers& layers) {
  if (!layers.similarity || !layers.ec || !layers.flows || !layers.viewpoints)
    throw ValidationError("consistency report needs similarity, EC, flow and viewpoint layers");
  const auto& sim = *layers.similarity;
  const auto& ec = *layers.ec;
  if (sim.corpus_fingerprint != ec.corpus_fingerprint || sim.corpus_fingerprint != layers.flows_fingerprint)
    throw ValidationError("layer/corpus mismatch: similarity " + sim.corpus_fingerprint + ", EC " +
                          ec.corpus_fingerprint + ", flows " + layers.flows_fingerprint);

  std::map<std::string, std::string> domain_of;
  for (const auto& v : *layers.viewpoints) domain_of[v.id] = v.domain_code;
  auto domain = [&](const std::string& id) {
    auto it = domain_of.find(id);
    if (it == domain_of.end()) throw ValidationError("layer references an unknown viewpoint", id);
    return it->second;
  };

  ConsistencyReport report;
  report.corpus_fingerprint = sim.corpus_fingerprint;

  std::map<std::string, std::pair<double, std::size_t>> within_sim;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    for (std::size_t j = i + 1; j < sim.size(); ++j) {
      const auto di = domain(sim.ids[i]);
      if (di != domain(sim.ids[j])) continue;
      within_sim[di].first += sim.at(i, j);
      ++within_sim[di].second;
    }
  }

  std::map<std::string, std::pair<std::size_t, std::size_t>> flow_counts;  // within, total
  std::size_t within_all = 0;
  for (const auto& f : *layers.flows) {
    const auto ds = domain(f.source.viewpoint_id);
    const bool same = ds == domain(f.target.viewpoint_id);
    flow_counts[ds].second++;
    if (same) {
      flow_counts[ds].first++;
      ++within_all;
    }
  }
  if (!layers.flows->empty())
    report.overall_within_flow_fraction = static_cast<double>(within_all) / static_cast<double>(layers.flows->size());

  for (std::size_t k = 0; k < ec.domains.size(); ++k) {
    const auto& code = ec.domains[k];
    DomainLayerStat stat;
    stat.domain = code;
    if (auto it = within_sim.find(code); it != within_sim.end() && it->second.second > 0)
      stat.within_similarity = it->second.first / static_cast<double>(it->second.second);
    double ec_sum = 0.0;
    std::size_t ec_n = 0;
    for (std::size_t i = 0; i < ec.domains.size(); ++i) {
      if (i == k || ec.counts[k][i] == 0 || !ec.cells[k][i]) continue;
      ec_sum += *ec.cells[k][i];
      ++ec_n;
    }
    if (ec_n > 0) stat.mean_outward_ec = ec_sum / static_cast<double>(ec_n);
    if (auto it = flow_counts.find(code); it != flow_counts.end() && it->second.second > 0) {
      stat.flows_from = it->second.second;
      stat.within_flow_fraction = static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
    }
    report.domains.push_back(std::move(stat));
  }

  auto top = [&](auto field) {
    std::string best;
    double best_v = -1e300;
    for (const auto& s : report.domains) {
      const auto v = field(s);
      if (v && *v > best_v) {
        best_v = *v;
        best = s.domain;
      }
    }
    return best;
  };
  report.top_similarity_domain = top([](const DomainLayerStat& s) { return s.within_similarity; });
  report.top_ec_domain = top([](const DomainLayerStat& s) { return s.mean_outward_ec; });
  report.top_flow_domain = top([](const DomainLayerStat& s) { return s.within_flow_fraction; });

  auto say = [&](const std::string& what, const std::string& d) {
    report.statements.push_back(d.empty() ? "no domain has data for " + what
                                          : d + " ranks first for " + what);
  };
  say("within-domain similarity", report.top_similarity_domain);
  say("mean outward eigenvector centrality", report.top_ec_domain);
  say("within-domain flow fraction", report.top_flow_domain);
  if (!report.top_similarity_domain.empty() && report.top_similarity_domain == report.top_flow_domain)
    report.statements.push_back("similarity and flow layers agree: " + report.top_similarity_domain +
                                " shows the strongest within-domain cohesion");
  else
    report.statements.push_back("similarity and flow layers disagree on the most cohesive domain (" +
                                report.top_similarity_domain + " vs " + report.top_flow_domain + ")");
  return report;
}

json consistency_to_json(const ConsistencyReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json domains = json::array();
  for (const auto& s : r.domains)
    domains.push_back({{"domain", s.domain},
                       {"within_similarity", opt(s.within_similarity)},
                       {"mean_outward_ec", opt(s.mean_outward_ec)},
                       {"within_flow_fraction", opt(s.within_flow_fraction)},
                       {"flows_from", s.flows_from}});
  return {{"domains", std::move(domains)},
          {"overall_within_flow_fraction", opt(r.overall_within_flow_fraction)},
          {"rank",
           {{"similarity", r.top_similarity_domain}, {"ec", r.top_ec_domain}, {"flows", r.top_flow_domain}}},
          {"statements", r.statements},
          {"corpus_fingerprint", r.corpus_fingerprint}};
}

}  // namespace converge
