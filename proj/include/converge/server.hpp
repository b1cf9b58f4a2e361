#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "converge/bundle.hpp"

namespace converge {

/// One HTTP response produced by the service: status plus JSON body.
struct ApiResponse {
  int status = 200;
  std::string body;
};

/// Routes API requests against a bundle. Readers run concurrently; review
/// submissions and layout recomputation take the single writer lock and drop
/// every cached body.
class Service {
 public:
  /// Throws ValidationError when the bundle is missing files or corrupt.
  explicit Service(std::filesystem::path bundle_dir);

  ApiResponse handle(const std::string& method, const std::string& path,
                     const std::map<std::string, std::string>& query, const std::string& body);

 private:
  ApiResponse cached(const std::string& key, const std::function<nlohmann::json()>& build);
  ApiResponse submit_responses(const std::string& body);
  ApiResponse recompute_layout(const std::string& body);

  Bundle bundle_;
  std::shared_mutex mutex_;
  std::mutex cache_mutex_;
  std::map<std::string, std::string> cache_;
};

/// httplib front end for Service.
class HttpServer {
 public:
  explicit HttpServer(std::filesystem::path bundle_dir);
  ~HttpServer();

  /// Binds `host:port` (port 0 picks a free port) and returns the port.
  /// Throws Error when the address is unavailable.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace converge
