#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace converge {

/// One request to a language-model provider: an instruction, the input it
/// applies to, and a seed for providers that honour one.
struct CompletionRequest {
  std::string instruction;
  std::string input;
  std::uint64_t seed = 0;
};

/// Request/response contract shared by the remote service and the offline
/// mock. `complete` returns the raw structured text; callers parse and
/// validate it. Transport failures throw ProviderError.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

/// Versioned prompt text compiled in from assets/prompts.
/// Names: nabc_preamble, extract_viewpoints, infer_flows, domain_affinity, repair.
const std::string& prompt_template(const std::string& name);

/// Offline provider. A pure function of (instruction, input, seed); the task
/// is read from the `task:` line of the instruction.
class MockProvider final : public Provider {
 public:
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "mock"; }
};

/// The function behind MockProvider.
///
/// extract_viewpoints: splits the input transcript into sentences and labels
/// each one with a keyword rule table (need/lack/insecurity -> N,
/// approach/method/technique/deploy -> A, benefit/improve/enable -> B,
/// competition/compared/existing -> C; a token matches when it starts with the
/// rule word). The ten highest-scoring sentences are returned in transcript
/// order, summary = first ten words, quote = the full sentence.
///
/// infer_flows: emits a flow for every (source, candidate) pair whose summary
/// content-token Jaccard index is >= 0.5; confidence is that index.
///
/// domain_affinity: fraction of keyword tokens present in the summary.
std::string deterministic_mock_extract(std::string_view instruction, std::string_view input,
                                       std::uint64_t seed);

/// Jaccard index over content tokens of two summaries.
double summary_jaccard(std::string_view a, std::string_view b);

inline constexpr double kMockFlowJaccard = 0.5;

}  // namespace converge
