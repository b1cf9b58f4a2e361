#include <doctest.h>

#include <random>
#include <set>

#include "converge/bundle.hpp"
#include "converge/error.hpp"
#include "converge/temporal.hpp"
#include "support.hpp"

using namespace converge;
using test_support::fixture;
using test_support::TempDir;

namespace {

struct Timeline {
  std::vector<PresentationSlot> slots;
  std::vector<Viewpoint> viewpoints;
};

Timeline timeline(const std::vector<int>& sizes) {
  Timeline tl;
  for (std::size_t p = 0; p < sizes.size(); ++p) {
    const std::string pid = "P" + std::to_string(p + 1);
    tl.slots.push_back({pid, static_cast<int>(p + 1)});
    for (int i = 1; i <= sizes[p]; ++i) {
      Viewpoint v;
      v.id = pid + "-" + std::to_string(i);
      v.presentation_id = pid;
      v.order_index = static_cast<int>(p + 1);
      v.index = i;
      tl.viewpoints.push_back(v);
    }
  }
  return tl;
}

FlowCandidate flow(const std::string& s, const std::string& t, FlowStatus status = FlowStatus::Proposed) {
  FlowCandidate f;
  f.source.viewpoint_id = s;
  f.target.viewpoint_id = t;
  f.reasoning = "r";
  f.status = status;
  return f;
}

RatioSeries series_of(const std::vector<std::pair<std::size_t, std::size_t>>& ve, int first_t = 1) {
  RatioSeries s;
  int t = first_t;
  for (const auto& [v, e] : ve) {
    RatioEntry x;
    x.t = t++;
    x.nodes = v;
    x.edges = e;
    x.ratio = static_cast<double>(e) / static_cast<double>(v);
    x.presentation = "P" + std::to_string(x.t + 1);
    s.entries.push_back(x);
  }
  return s;
}

}  // namespace

TEST_CASE("cumulative graphs are nested") {
  const auto tl = timeline({2, 2, 3});
  const auto gs = build_cumulative_graphs(tl.viewpoints, {flow("P1-1", "P2-1"), flow("P1-2", "P2-2")}, tl.slots);
  REQUIRE(gs.size() == 2);
  CHECK(gs[0].t == 1);
  CHECK(gs[0].nodes.size() == 4);
  CHECK(gs[0].edges.size() == 2);
  CHECK(gs[1].t == 2);
  CHECK(gs[1].nodes.size() == 7);
  CHECK(gs[1].edges == gs[0].edges);
  CHECK(gs[1].n_new == 3);
  CHECK(gs[1].e_new == 0);
}

TEST_CASE("no flows gives a zero ratio everywhere") {
  const auto tl = timeline({1, 2, 3, 1});
  const auto series = ratio_series(build_cumulative_graphs(tl.viewpoints, {}, tl.slots));
  REQUIRE(series.entries.size() == 3);
  for (const auto& e : series.entries) CHECK(e.ratio == 0.0);
}

TEST_CASE("duplicate flows collapse and bad flows are rejected") {
  const auto tl = timeline({1, 1});
  auto gs = build_cumulative_graphs(tl.viewpoints, {flow("P1-1", "P2-1"), flow("P1-1", "P2-1")}, tl.slots);
  CHECK(gs[0].edges.size() == 1);
  CHECK_THROWS_AS(build_cumulative_graphs(tl.viewpoints, {flow("P2-1", "P1-1")}, tl.slots), ValidationError);
  CHECK_THROWS_AS(build_cumulative_graphs(tl.viewpoints, {flow("P1-1", "P9-1")}, tl.slots), ValidationError);
  auto empty = timeline({1, 0, 1});
  CHECK_THROWS_WITH_AS(build_cumulative_graphs(empty.viewpoints, {}, empty.slots),
                       doctest::Contains("no viewpoints"), ValidationError);
}

TEST_CASE("ratio arithmetic") {
  // (5, 3) then four new nodes and no edges; (5, 3) then two nodes and five edges.
  auto tl = timeline({2, 3, 4});
  std::vector<FlowCandidate> fs = {flow("P1-1", "P2-1"), flow("P1-2", "P2-2"), flow("P1-1", "P2-3")};
  auto series = ratio_series(build_cumulative_graphs(tl.viewpoints, fs, tl.slots));
  CHECK(series.entries[0].ratio == doctest::Approx(0.6));
  CHECK(series.entries[1].ratio == doctest::Approx(1.0 / 3.0));
  CHECK(series.entries[1].ratio < series.entries[0].ratio);

  tl = timeline({2, 3, 2});
  fs.push_back(flow("P1-1", "P3-1"));
  fs.push_back(flow("P1-2", "P3-1"));
  fs.push_back(flow("P2-1", "P3-1"));
  fs.push_back(flow("P2-2", "P3-2"));
  fs.push_back(flow("P2-3", "P3-2"));
  series = ratio_series(build_cumulative_graphs(tl.viewpoints, fs, tl.slots));
  CHECK(series.entries[1].ratio == doctest::Approx(8.0 / 7.0));
  CHECK(series.entries[1].e_new == 5);
}

TEST_CASE("incremental and batch ratios agree on random nested sequences") {
  std::mt19937_64 rng(1000);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 10;
    std::vector<int> sizes;
    for (std::size_t p = 0; p < n; ++p) sizes.push_back(1 + static_cast<int>(rng() % 6));
    const auto tl = timeline(sizes);
    std::vector<FlowCandidate> fs;
    const std::size_t m = rng() % 40;
    for (std::size_t k = 0; k < m; ++k) {
      const auto& a = tl.viewpoints[rng() % tl.viewpoints.size()];
      const auto& b = tl.viewpoints[rng() % tl.viewpoints.size()];
      if (a.order_index < b.order_index) fs.push_back(flow(a.id, b.id));
    }
    const auto graphs = build_cumulative_graphs(tl.viewpoints, fs, tl.slots);
    const auto series = ratio_series(graphs);
    REQUIRE(series.entries.size() == n - 1);
    for (std::size_t k = 0; k < series.entries.size(); ++k) {
      const auto& e = series.entries[k];
      // Batch: count from scratch over the first t+1 presentations.
      std::size_t v = 0;
      std::set<std::pair<std::string, std::string>> edges;
      for (const auto& x : tl.viewpoints)
        if (x.order_index <= e.t + 1) ++v;
      std::map<std::string, int> order;
      for (const auto& x : tl.viewpoints) order[x.id] = x.order_index;
      for (const auto& f : fs)
        if (order[f.target.viewpoint_id] <= e.t + 1) edges.insert({f.source.viewpoint_id, f.target.viewpoint_id});
      CHECK(e.nodes == v);
      CHECK(e.edges == edges.size());
      CHECK(e.ratio == static_cast<double>(edges.size()) / static_cast<double>(v));
      if (k > 0) {
        const auto& p = series.entries[k - 1];
        CHECK(static_cast<double>(p.edges + e.e_new) / static_cast<double>(p.nodes + e.n_new) == e.ratio);
        if (e.e_new == 0 && p.ratio > 0.0) CHECK(e.ratio < p.ratio);
        if (e.n_new == 0 && e.e_new > 0) CHECK(e.ratio > p.ratio);
      }
    }
  }
}

TEST_CASE("trend report") {
  // 0.2, 0.4, 0.3, 0.6: the second step is the only decrease.
  auto report = trend_report(series_of({{5, 1}, {5, 2}, {10, 3}, {10, 6}}));
  REQUIRE(report.decreases.size() == 1);
  CHECK(report.decreases[0].step == 3);
  CHECK(report.deltas[1] < 0.0);
  CHECK(report.slope == doctest::Approx(0.11));
  CHECK(report.verdict == "converging with temporary decreases");

  report = trend_report(series_of({{4, 1}, {5, 2}, {6, 4}}));
  CHECK(report.decreases.empty());
  CHECK(report.slope > 0.0);
  CHECK(report.verdict == "converging");

  report = trend_report(series_of({{4, 2}, {6, 3}, {8, 4}}));
  CHECK(report.slope == 0.0);
  CHECK(report.verdict == "no change");

  CHECK_THROWS_AS(trend_report(series_of({{4, 2}})), ValidationError);
}

TEST_CASE("selectors drop rejected flows") {
  const std::vector<FlowCandidate> fs = {flow("a", "b", FlowStatus::Proposed), flow("a", "c", FlowStatus::Accepted),
                                         flow("b", "c", FlowStatus::Rejected)};
  CHECK(select_flows(fs, FlowSelector::All).size() == 2);
  const auto acc = select_flows(fs, FlowSelector::Accepted);
  REQUIRE(acc.size() == 1);
  CHECK(acc[0].key() == "a->c");
  CHECK(parse_flow_selector("accepted") == FlowSelector::Accepted);
  CHECK_THROWS_AS(parse_flow_selector("some"), ValidationError);
}

TEST_CASE("study fixture: ten steps, dips at 6 and 10, rising overall") {
  TempDir dir("temporal_fixture");
  run_pipeline(PipelineConfig{}, fixture("study_corpus.json"), dir / "b");
  const Bundle b(dir / "b");
  const auto doc = b.read_json("ratio.json");
  REQUIRE(doc["entries"].size() == 10);
  CHECK(doc["entries"][0]["t"] == 1);
  CHECK(doc["entries"][9]["t"] == 10);
  std::vector<int> steps;
  for (const auto& d : doc["trend"]["decreases"]) steps.push_back(d["step"].get<int>());
  CHECK(steps == std::vector<int>{6, 10});
  CHECK(doc["trend"]["slope"].get<double>() > 0.0);
  CHECK(doc["entries"][5]["e_new"] == 0);
  CHECK(b.read_json("flow_map.json")["edges"].size() == 42);
  const auto csv = read_file(b.path("ratio.csv"));
  CHECK(csv.rfind("t,V,E,r\n", 0) == 0);
}
