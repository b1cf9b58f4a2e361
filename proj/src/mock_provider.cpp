#include <algorithm>
#include <array>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "converge/provider.hpp"
#include "converge/text.hpp"

namespace converge {

using nlohmann::json;

namespace {

struct Rule {
  char label;
  std::array<std::string_view, 4> stems;
};

// Order matters: ties between labels go to the earlier rule.
constexpr std::array<Rule, 4> kRules = {{
    {'N', {"need", "lack", "insecurity", ""}},
    {'A', {"approach", "method", "technique", "deploy"}},
    {'B', {"benefit", "improve", "enable", ""}},
    {'C', {"competition", "compared", "existing", ""}},
}};

std::string task_of(std::string_view instruction) {
  constexpr std::string_view tag = "task:";
  auto pos = instruction.find(tag);
  if (pos == std::string_view::npos) return {};
  pos += tag.size();
  while (pos < instruction.size() && instruction[pos] == ' ') ++pos;
  auto end = instruction.find_first_of(" \r\n", pos);
  return std::string(instruction.substr(pos, end == std::string_view::npos ? end : end - pos));
}

struct Scored {
  std::size_t position;
  int score;
  char label;
  std::string sentence;
};

std::string mock_extract_viewpoints(std::string_view transcript) {
  std::vector<Scored> scored;
  const auto sentences = text::split_sentences(transcript);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::array<int, kRules.size()> hits{};
    for (const auto& token : text::tokenize(sentences[i])) {
      for (std::size_t r = 0; r < kRules.size(); ++r) {
        for (auto stem : kRules[r].stems) {
          if (!stem.empty() && token.starts_with(stem)) ++hits[r];
        }
      }
    }
    const auto best = std::max_element(hits.begin(), hits.end());
    if (*best == 0) continue;
    int total = 0;
    for (int h : hits) total += h;
    scored.push_back({i, total, kRules[static_cast<std::size_t>(best - hits.begin())].label, sentences[i]});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) { return a.score > b.score; });
  if (scored.size() > 10) scored.resize(10);
  std::sort(scored.begin(), scored.end(),
            [](const Scored& a, const Scored& b) { return a.position < b.position; });

  json out = {{"viewpoints", json::array()}};
  for (const auto& s : scored) {
    out["viewpoints"].push_back(
        {{"summary", text::first_words(s.sentence, 10)}, {"nabc", std::string(1, s.label)}, {"quote", s.sentence}});
  }
  return out.dump();
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string mock_infer_flows(std::string_view input) {
  json out = {{"flows", json::array()}};
  const json doc = json::parse(input, nullptr, false);
  if (doc.is_discarded() || !doc.contains("source") || !doc.contains("candidates")) return out.dump();
  for (const auto& s : doc["source"]) {
    const auto s_tokens = text::content_tokens(s.value("summary", ""));
    const std::set<std::string> s_set(s_tokens.begin(), s_tokens.end());
    for (const auto& c : doc["candidates"]) {
      const std::string s_sum = s.value("summary", "");
      const std::string c_sum = c.value("summary", "");
      const double j = summary_jaccard(s_sum, c_sum);
      if (j < kMockFlowJaccard) continue;
      std::string shared;
      for (const auto& t : text::content_tokens(c_sum)) {
        if (s_set.count(t) && shared.find(t) == std::string::npos) shared += (shared.empty() ? "" : ", ") + t;
      }
      const bool within = s.value("nabc", "") == c.value("nabc", "");
      out["flows"].push_back({{"source", s.value("id", "")},
                              {"target", c.value("id", "")},
                              {"kind", within ? "within_category" : "cross_category"},
                              {"reasoning", "Later viewpoint reuses the terms " + shared + " (overlap " +
                                                format_score(j) + ")."},
                              {"confidence", j}});
    }
  }
  return out.dump();
}

std::string mock_domain_affinity(std::string_view input) {
  const json doc = json::parse(input, nullptr, false);
  if (doc.is_discarded()) return json{{"score", 0.0}}.dump();
  std::set<std::string> keyword_tokens;
  for (const auto& k : doc.value("keywords", json::array())) {
    for (auto& t : text::content_tokens(k.get<std::string>())) keyword_tokens.insert(std::move(t));
  }
  const auto summary = text::content_tokens(doc.value("summary", ""));
  const std::set<std::string> summary_set(summary.begin(), summary.end());
  std::size_t hit = 0;
  for (const auto& k : keyword_tokens) hit += summary_set.count(k);
  const double score = keyword_tokens.empty() ? 0.0 : static_cast<double>(hit) / keyword_tokens.size();
  return json{{"score", score}}.dump();
}

}  // namespace

double summary_jaccard(std::string_view a, std::string_view b) {
  const auto ta = text::content_tokens(a);
  const auto tb = text::content_tokens(b);
  const std::set<std::string> sa(ta.begin(), ta.end()), sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

std::string deterministic_mock_extract(std::string_view instruction, std::string_view input,
                                       std::uint64_t /*seed*/) {
  const auto task = task_of(instruction);
  if (task == "extract_viewpoints") return mock_extract_viewpoints(input);
  if (task == "infer_flows") return mock_infer_flows(input);
  if (task == "domain_affinity") return mock_domain_affinity(input);
  return json{{"error", "unknown task '" + task + "'"}}.dump();
}

}  // namespace converge
