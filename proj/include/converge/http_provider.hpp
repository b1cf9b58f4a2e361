#pragma once

#include <optional>
#include <string>

#include "converge/provider.hpp"
#include "converge/semantics.hpp"

namespace converge {

/// Connection settings for an OpenAI-compatible endpoint.
struct HttpProviderConfig {
  std::string endpoint;  // base URL, e.g. https://api.example.com/v1
  std::string api_key;
  std::string model = "gpt-4o-mini";
  std::string embedding_model = "text-embedding-3-small";
  int timeout_seconds = 60;

  /// Reads CONVERGE_PROVIDER_ENDPOINT, CONVERGE_PROVIDER_KEY,
  /// CONVERGE_PROVIDER_MODEL and CONVERGE_EMBEDDING_MODEL. Returns nullopt
  /// with `error` set when endpoint or key is missing.
  static std::optional<HttpProviderConfig> from_env(std::string* error = nullptr);
};

/// Chat-completions client. Requests JSON-object output at temperature 0.
class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig config);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "http"; }

 private:
  HttpProviderConfig config_;
};

class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(HttpProviderConfig config);
  EmbeddingVector embed(std::string_view text) override;
  std::string name() const override { return "http"; }

 private:
  HttpProviderConfig config_;
};

}  // namespace converge
