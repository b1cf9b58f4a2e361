#include <doctest.h>

#include <array>
#include <map>
#include <set>
#include <random>

#include "converge/corpus.hpp"
#include "converge/error.hpp"
#include "converge/extraction.hpp"
#include "scripted_provider.hpp"
#include "support.hpp"

using namespace converge;
using nlohmann::json;
using test_support::ScriptedProvider;

namespace {

Presentation talk(std::string id, int order, std::string presenter, std::string domain, std::string transcript) {
  return {std::move(id), order, std::move(presenter), std::move(domain), std::move(transcript)};
}

std::string viewpoints_json(const std::vector<std::array<std::string, 3>>& items) {
  json doc = {{"viewpoints", json::array()}};
  for (const auto& [summary, nabc, quote] : items)
    doc["viewpoints"].push_back({{"summary", summary}, {"nabc", nabc}, {"quote", quote}});
  return doc.dump();
}

Viewpoint vp(std::string id, std::string presenter, int order, int index, Nabc n, std::string summary) {
  Viewpoint v;
  v.id = std::move(id);
  v.presentation_id = "P" + std::to_string(order);
  v.presenter = std::move(presenter);
  v.domain_code = "WT";
  v.order_index = order;
  v.index = index;
  v.nabc = n;
  v.summary = v.quote = std::move(summary);
  return v;
}

// Independent character-level check: walk both strings, treating any run of
// whitespace bytes (ASCII only here) as one separator.
bool char_level_contains(const std::string& hay, const std::string& needle) {
  auto squash = [](const std::string& s) {
    std::string out;
    bool gap = false;
    for (char c : s) {
      if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
        gap = !out.empty();
      } else {
        if (gap) out += ' ';
        gap = false;
        out += c;
      }
    }
    return out;
  };
  return squash(hay).find(squash(needle)) != std::string::npos;
}

}  // namespace

TEST_CASE("grounding passes on exact sentences and whitespace variants") {
  const std::string t = "We need clean water.\nIt is   scarce.";
  CHECK(verify_grounding("We need clean water.", t).pass);
  CHECK(verify_grounding("It is scarce.", t).pass);
  CHECK(verify_grounding("clean water. It\n is scarce", t).pass);
  const auto bad = verify_grounding("We need very clean water.", t);
  CHECK_FALSE(bad.pass);
  CHECK(bad.reason == "quote not found");
  CHECK(verify_grounding("  ", t).reason == "empty quote");
  CHECK_FALSE(verify_grounding("we need clean water.", t).pass);  // case-sensitive
}

TEST_CASE("grounding agrees with a character-level checker on random whitespace") {
  std::mt19937 rng(3);
  const std::vector<std::string> words = {"water", "need", "filters", "policy", "rural", "pump"};
  const std::vector<std::string> gaps = {" ", "  ", "\n", "\t ", "\r\n"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string hay, needle;
    const int n = 3 + static_cast<int>(rng() % 8);
    std::vector<std::string> ws;
    for (int i = 0; i < n; ++i) ws.push_back(words[rng() % words.size()]);
    for (int i = 0; i < n; ++i) hay += ws[i] + gaps[rng() % gaps.size()];
    const int a = static_cast<int>(rng() % n), b = a + static_cast<int>(rng() % (n - a));
    for (int i = a; i <= b; ++i) needle += ws[i] + (i < b ? gaps[rng() % gaps.size()] : "");
    if (rng() % 3 == 0) needle += " extra";
    CHECK(verify_grounding(needle, hay).pass == char_level_contains(hay, needle));
  }
}

TEST_CASE("mock extraction yields a grounded Needs viewpoint") {
  MockProvider mock;
  const auto p = talk("P07", 7, "Orbit", "WT",
                      "Good morning. There is an essential need for clean and safe water in communities "
                      "served by the project. Thank you.");
  const auto r = extract_viewpoints(p, mock, {});
  REQUIRE(r.viewpoints.size() == 1);
  const auto& v = r.viewpoints[0];
  CHECK(v.nabc == Nabc::Needs);
  CHECK(v.id == "WT-Orbit-1");
  CHECK(v.quote == "There is an essential need for clean and safe water in communities served by the project.");
  CHECK(v.summary == "There is an essential need for clean and safe water");
  CHECK(verify_grounding(v, p.transcript).pass);
}

TEST_CASE("no matching sentence gives an empty list and a warning") {
  MockProvider mock;
  const auto r = extract_viewpoints(talk("P1", 1, "A", "WT", "The weather was pleasant."), mock, {});
  CHECK(r.viewpoints.empty());
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("no viewpoints extracted") != std::string::npos);
}

TEST_CASE("ungrounded viewpoints are dropped and kept in the raw set") {
  const std::string t = "We need pumps. Our method is solar.";
  ScriptedProvider p({viewpoints_json({{"need pumps", "N", "We need pumps."}, {"made up", "A", "We invented it."},
                                       {"solar", "A", "Our method is solar."}})});
  const auto r = extract_viewpoints(talk("P1", 1, "Al", "WT", t), p, {});
  REQUIRE(r.viewpoints.size() == 2);
  CHECK(r.viewpoints[1].id == "WT-Al-2");
  CHECK(r.viewpoints[1].index == 2);
  REQUIRE(r.raw.size() == 3);
  CHECK_FALSE(r.raw[1].grounded);
  CHECK(r.raw[1].reason == "quote not found");
}

TEST_CASE("more than the cap is truncated") {
  std::vector<std::array<std::string, 3>> items;
  std::string t;
  for (int i = 0; i < 12; ++i) {
    const auto s = "We need thing " + std::to_string(i) + ".";
    t += s + " ";
    items.push_back({"thing", "N", s});
  }
  ScriptedProvider p({viewpoints_json(items)});
  const auto r = extract_viewpoints(talk("P1", 1, "Al", "WT", t), p, {});
  CHECK(r.viewpoints.size() == 10);
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("schema errors trigger repair prompts, then fail with the raw response") {
  const std::string t = "We need pumps.";
  const auto good = viewpoints_json({{"need pumps", "N", "We need pumps."}});
  SUBCASE("recovers after a malformed answer") {
    ScriptedProvider p({"not json at all", good});
    const auto r = extract_viewpoints(talk("P1", 1, "Al", "WT", t), p, {});
    CHECK(r.viewpoints.size() == 1);
    REQUIRE(p.requests.size() == 2);
    CHECK(p.requests[1].instruction.find("not json at all") != std::string::npos);
  }
  SUBCASE("long summaries and bad labels are schema errors") {
    ScriptedProvider p({viewpoints_json({{"one two three four five six seven eight nine ten eleven", "N", t}}),
                        viewpoints_json({{"short", "X", t}}), viewpoints_json({{"short", "Needs", t}})});
    const auto r = extract_viewpoints(talk("P1", 1, "Al", "WT", t), p, {});
    CHECK(r.viewpoints.size() == 1);
    CHECK(p.requests.size() == 3);
  }
  SUBCASE("gives up after the retry budget") {
    ScriptedProvider p({"{}", "{}", "{\"viewpoints\": 3}"});
    try {
      extract_viewpoints(talk("P1", 1, "Al", "WT", t), p, {});
      FAIL("expected a schema error");
    } catch (const SchemaError& e) {
      CHECK(e.raw_response() == "{\"viewpoints\": 3}");
    }
  }
  SUBCASE("provider failures are retried") {
    ScriptedProvider p({"!fail", good});
    CHECK(extract_viewpoints(talk("P1", 1, "Al", "WT", t), p, {}).viewpoints.size() == 1);
    ScriptedProvider dead({"!fail", "!fail", "!fail"});
    CHECK_THROWS_AS(extract_viewpoints(talk("P1", 1, "Al", "WT", t), dead, {}), ProviderError);
  }
}

TEST_CASE("extract_corpus is order-deterministic for any thread count") {
  const auto corpus = load_corpus(test_support::fixture("study_corpus.json"));
  MockProvider mock;
  const auto one = extract_corpus(corpus, mock, {}, 1);
  const auto many = extract_corpus(corpus, mock, {}, 4);
  REQUIRE(one.size() == many.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].presentation_id == corpus.presentations[i].id);
    CHECK(one[i].viewpoints == many[i].viewpoints);
    total += one[i].viewpoints.size();
  }
  CHECK(total == 89);
}

TEST_CASE("overlapping Needs viewpoints produce one forward within-category flow") {
  MockProvider mock;
  const std::vector<Viewpoint> vs = {
      vp("WT-A-1", "A", 1, 1, Nabc::Needs, "Rural water insecurity needs attention"),
      vp("WT-B-1", "B", 2, 1, Nabc::Needs, "Rural water insecurity needs funding"),
  };
  const auto r = infer_flows(vs, mock, {});
  REQUIRE(r.flows.size() == 1);
  CHECK(r.flows[0].source.viewpoint_id == "WT-A-1");
  CHECK(r.flows[0].target.viewpoint_id == "WT-B-1");
  CHECK(r.flows[0].kind == FlowKind::WithinCategory);
  CHECK(r.flows[0].status == FlowStatus::Proposed);
  CHECK_FALSE(r.flows[0].reasoning.empty());
}

TEST_CASE("single presentation infers nothing") {
  MockProvider mock;
  CHECK(infer_flows({vp("WT-A-1", "A", 1, 1, Nabc::Needs, "x"), vp("WT-A-2", "A", 1, 2, Nabc::Needs, "x")}, mock, {})
            .flows.empty());
}

TEST_CASE("invalid provider flows are rejected and logged") {
  std::vector<Viewpoint> vs;
  for (int p = 1; p <= 5; ++p) vs.push_back(vp("V" + std::to_string(p), "S" + std::to_string(p), p, 1, Nabc::Needs, "s"));
  vs.push_back(vp("V1b", "S1", 1, 2, Nabc::Approach, "s"));
  auto flow = [](std::string s, std::string t, std::string kind, std::string why = "because") {
    return json{{"source", s}, {"target", t}, {"kind", kind}, {"reasoning", why}};
  };
  json first = {{"flows",
                 {flow("V1", "V2", "within_category"), flow("V1", "V2", "within_category"),
                  flow("V1", "V1b", "cross_category"), flow("V1", "V3", "cross_category"),
                  flow("V1", "V4", "within_category", "  "), flow("V1", "nope", "within_category"),
                  flow("V5", "V2", "within_category"), flow("V1b", "V5", "cross_category")}}};
  std::vector<std::string> answers = {first.dump()};
  for (int i = 0; i < 2; ++i) answers.push_back(json{{"flows", json::array()}}.dump());
  answers.push_back(json{{"flows", {flow("V4", "V2", "within_category")}}}.dump());
  ScriptedProvider p(answers);
  const auto r = infer_flows(vs, p, {});
  REQUIRE(r.flows.size() == 2);
  CHECK(r.flows[0].key() == "V1->V2");
  CHECK(r.flows[1].key() == "V1b->V5");
  auto logged = [&](const std::string& what) {
    for (const auto& l : r.log)
      if (l.find(what) != std::string::npos) return true;
    return false;
  };
  CHECK(logged("collapsed duplicate V1->V2"));
  CHECK(logged("V1->V1b: flow within one presentation"));
  CHECK(logged("V1->V3: kind 'cross_category' contradicts NABC labels N/N"));
  CHECK(logged("V1->V4: missing reasoning"));
  CHECK(logged("V1->nope: unknown viewpoint"));
  CHECK(logged("V5->V2: source outside the requested presentation"));
  CHECK(logged("V4->V2: backward flow"));
  // P4 is the last call with candidates; P5 is never asked.
  CHECK(p.requests.size() == 4);
}

TEST_CASE("per-presenter caps keep the most confident flows") {
  std::vector<Viewpoint> vs = {vp("S-1", "Src", 1, 1, Nabc::Needs, "s"), vp("S-2", "Src", 1, 2, Nabc::Approach, "s")};
  json flows = json::array();
  for (int i = 0; i < 15; ++i) {
    const auto id = "T-" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    vs.push_back(vp(id, "Tgt", 2, i + 1, Nabc::Needs, "t"));
    flows.push_back({{"source", "S-1"}, {"target", id}, {"kind", "within_category"}, {"reasoning", "r"},
                     {"confidence", i % 3 == 0 ? 0.9 : 0.5}});
    flows.push_back({{"source", "S-2"}, {"target", id}, {"kind", "cross_category"}, {"reasoning", "r"},
                     {"confidence", 0.6}});
  }
  ScriptedProvider p({json{{"flows", flows}}.dump()});
  const auto r = infer_flows(vs, p, {});
  std::map<FlowKind, int> per_kind;
  for (const auto& f : r.flows) per_kind[f.kind]++;
  CHECK(r.flows.size() == 20);
  CHECK(per_kind[FlowKind::WithinCategory] == 10);
  CHECK(per_kind[FlowKind::CrossCategory] == 10);
  // All five 0.9 flows survive; the rest are the lowest target ids at 0.5.
  std::set<std::string> kept;
  for (const auto& f : r.flows)
    if (f.kind == FlowKind::WithinCategory) kept.insert(f.target.viewpoint_id);
  for (const char* id : {"T-00", "T-03", "T-06", "T-09", "T-12", "T-01", "T-02", "T-04", "T-05", "T-07"})
    CHECK(kept.count(id) == 1);
}

TEST_CASE("viewpoint and flow JSON round-trip") {
  const auto v = vp("WT-A-1", "A", 1, 1, Nabc::Benefit, "summary");
  CHECK(json(v).get<Viewpoint>() == v);
  FlowCandidate f;
  f.source = {"a", "A", Nabc::Needs};
  f.target = {"b", "B", Nabc::Competition};
  f.kind = FlowKind::CrossCategory;
  f.reasoning = "r";
  f.status = FlowStatus::Rejected;
  f.confidence = 0.25;
  CHECK(json(f).get<FlowCandidate>() == f);
  f.confidence.reset();
  CHECK(json(f).get<FlowCandidate>() == f);
}
