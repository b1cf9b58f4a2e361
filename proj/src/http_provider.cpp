#include "converge/http_provider.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "converge/error.hpp"

namespace converge {

using nlohmann::json;

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

Url split_url(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) throw ProviderError("endpoint must include a scheme: " + endpoint);
  const auto path_begin = endpoint.find('/', scheme_end + 3);
  Url u;
  u.origin = endpoint.substr(0, path_begin);
  u.path = path_begin == std::string::npos ? "" : endpoint.substr(path_begin);
  while (!u.path.empty() && u.path.back() == '/') u.path.pop_back();
  return u;
}

json post_json(const HttpProviderConfig& config, const std::string& route, const json& body) {
  const auto url = split_url(config.endpoint);
  httplib::Client client(url.origin);
  client.set_connection_timeout(config.timeout_seconds);
  client.set_read_timeout(config.timeout_seconds);
  client.set_bearer_token_auth(config.api_key);
  auto res = client.Post(url.path + route, body.dump(), "application/json");
  if (!res) throw ProviderError("request to " + config.endpoint + route + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw ProviderError("provider returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
  json doc = json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) throw ProviderError("provider returned a non-JSON body");
  return doc;
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

}  // namespace

std::optional<HttpProviderConfig> HttpProviderConfig::from_env(std::string* error) {
  HttpProviderConfig c;
  c.endpoint = env_or("CONVERGE_PROVIDER_ENDPOINT", "");
  c.api_key = env_or("CONVERGE_PROVIDER_KEY", "");
  c.model = env_or("CONVERGE_PROVIDER_MODEL", c.model);
  c.embedding_model = env_or("CONVERGE_EMBEDDING_MODEL", c.embedding_model);
  std::string missing;
  if (c.endpoint.empty()) missing += "CONVERGE_PROVIDER_ENDPOINT ";
  if (c.api_key.empty()) missing += "CONVERGE_PROVIDER_KEY ";
  if (!missing.empty()) {
    if (error) *error = "missing provider credentials: " + missing.substr(0, missing.size() - 1);
    return std::nullopt;
  }
  return c;
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {}

std::string HttpProvider::complete(const CompletionRequest& request) {
  const json body = {{"model", config_.model},
                     {"temperature", 0},
                     {"seed", request.seed},
                     {"response_format", {{"type", "json_object"}}},
                     {"messages",
                      {{{"role", "system"}, {"content", request.instruction}},
                       {{"role", "user"}, {"content", request.input}}}}};
  const json doc = post_json(config_, "/chat/completions", body);
  try {
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw ProviderError("provider response has no choices[0].message.content");
  }
}

HttpEmbedder::HttpEmbedder(HttpProviderConfig config) : config_(std::move(config)) {}

EmbeddingVector HttpEmbedder::embed(std::string_view text) {
  const json doc = post_json(config_, "/embeddings", {{"model", config_.embedding_model}, {"input", text}});
  try {
    return EmbeddingVector{doc.at("data").at(0).at("embedding").get<std::vector<double>>()};
  } catch (const json::exception&) {
    throw ProviderError("embedding response has no data[0].embedding");
  }
}

}  // namespace converge
