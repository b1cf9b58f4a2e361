#include "converge/server.hpp"

#include <functional>

#include <httplib.h>

#include "converge/error.hpp"

namespace converge {

using nlohmann::json;

namespace {

ApiResponse error_response(int status, const std::string& message) {
  return {status, dump_json({{"error", message}, {"status", status}})};
}

double parse_percentile(const std::map<std::string, std::string>& query, double fallback) {
  auto it = query.find("percentile");
  if (it == query.end()) return fallback;
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != it->second.size()) throw ValidationError("percentile must be a number", it->second);
  return p;
}

std::string param(const std::map<std::string, std::string>& query, const std::string& key, const std::string& fallback) {
  auto it = query.find(key);
  return it == query.end() ? fallback : it->second;
}

}  // namespace

Service::Service(std::filesystem::path bundle_dir) : bundle_(std::move(bundle_dir)) {
  if (!std::filesystem::is_directory(bundle_.root()))
    throw ValidationError("bundle directory does not exist", bundle_.root().string());
  for (const char* f : {"config.json", "corpus.json", "viewpoints.json", "flows.json", "similarity.json",
                        "graph.json", "layout.json", "ec_matrix.json"}) {
    if (!bundle_.has(f)) throw ValidationError("corrupt bundle: missing file", f);
  }
  bundle_.config();
  bundle_.corpus();
  bundle_.viewpoints();
}

ApiResponse Service::cached(const std::string& key, const std::function<json()>& build) {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return {200, it->second};
  }
  auto body = dump_json(build());
  std::lock_guard lock(cache_mutex_);
  cache_.emplace(key, body);
  return {200, std::move(body)};
}

ApiResponse Service::handle(const std::string& method, const std::string& path,
                            const std::map<std::string, std::string>& query, const std::string& body) {
  try {
    if (method == "POST" && path == "/api/survey/responses") return submit_responses(body);
    if (method == "POST" && path == "/api/layout") return recompute_layout(body);
    if (method != "GET") return error_response(404, "no route for " + method + " " + path);

    std::shared_lock lock(mutex_);
    const auto config = bundle_.config();
    if (path == "/api/graph") {
      const double p = parse_percentile(query, config.percentile);
      const auto mode = parse_graph_mode(param(query, "mode", to_string(config.mode)));
      char key[64];
      std::snprintf(key, sizeof key, "graph|%.17g|", p);
      return cached(key + to_string(mode), [&] { return graph_export(bundle_, p, mode); });
    }
    if (path == "/api/layout") return cached("layout", [&] { return bundle_.read_json("layout.json"); });
    if (path == "/api/ec-matrix") return cached("ec", [&] { return bundle_.read_json("ec_matrix.json"); });
    if (path == "/api/flows") {
      const auto sel = parse_flow_selector(param(query, "selector", to_string(config.flow_selector)));
      return cached("flows|" + to_string(sel), [&] { return flows_export(bundle_, sel); });
    }
    if (path == "/api/ratio") {
      const auto sel = parse_flow_selector(param(query, "selector", to_string(config.flow_selector)));
      return cached("ratio|" + to_string(sel), [&] { return ratio_export(bundle_, sel); });
    }
    if (path == "/api/survey") return cached("survey", [&] { return survey_export(bundle_); });
    if (path == "/api/report/consistency") return cached("report", [&] { return consistency_export(bundle_); });
    return error_response(404, "no route for GET " + path);
  } catch (const ConflictError& e) {
    return error_response(409, e.what());
  } catch (const ValidationError& e) {
    return error_response(400, e.what());
  } catch (const json::exception& e) {
    return error_response(400, std::string("malformed request: ") + e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

ApiResponse Service::submit_responses(const std::string& body) {
  const auto doc = json::parse(body);
  std::vector<SurveyResponse> responses;
  if (doc.contains("item_id")) responses = responses_from_json(json{{"responses", json::array({doc})}});
  else responses = responses_from_json(doc);

  std::unique_lock lock(mutex_);
  const auto result = import_responses(bundle_, responses);
  {
    std::lock_guard cache_lock(cache_mutex_);
    cache_.clear();
  }
  return {200, dump_json({{"recorded", responses.size()},
                          {"stats",
                           {{"total_items", result.stats.total_items},
                            {"reviewed", result.stats.reviewed},
                            {"disagreed", result.stats.disagreed},
                            {"disagreement_rate", result.stats.rate_text()}}}})};
}

ApiResponse Service::recompute_layout(const std::string& body) {
  const auto doc = body.empty() ? json::object() : json::parse(body);
  std::unique_lock lock(mutex_);
  const std::uint64_t seed = doc.value("seed", bundle_.config().seed);
  stage_layout(bundle_, seed);
  std::lock_guard cache_lock(cache_mutex_);
  cache_.clear();
  auto text = read_file(bundle_.path("layout.json"));
  cache_.emplace("layout", text);
  return {200, std::move(text)};
}

struct HttpServer::Impl {
  explicit Impl(std::filesystem::path dir) : service(std::move(dir)) {}
  Service service;
  httplib::Server server;
};

HttpServer::HttpServer(std::filesystem::path bundle_dir) : impl_(std::make_unique<Impl>(std::move(bundle_dir))) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const auto out = impl_->service.handle(req.method, req.path, query, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  // httplib's default also sets SO_REUSEPORT, which lets a second server
  // share a busy port silently.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
  impl_->server.Put(".*", handler);
  impl_->server.Delete(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port) + " (port busy or address invalid)");
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace converge
