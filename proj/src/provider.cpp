#include "converge/provider.hpp"

namespace converge {

std::string MockProvider::complete(const CompletionRequest& request) {
  return deterministic_mock_extract(request.instruction, request.input, request.seed);
}

}  // namespace converge
