#pragma once

// HTTP JSON API under /v1. Routing lives in Service::handle so it can be
// exercised without sockets; serve() binds it to an httplib server.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "elicit/session.hpp"

namespace httplib {
class Server;
}

namespace elicit {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Transcripts are written through to <data_dir>/<id>.jsonl and replayed
  /// on start.
  std::optional<std::filesystem::path> data_dir;
  /// Sample-count cap for GET diagnostics; larger N belongs to the CLI.
  std::size_t max_diagnostic_n = 2000;
  std::optional<std::string> bearer_token;
  /// "fixed" uses default_seed for new sessions, "random" draws one.
  std::string seed_policy = "fixed";
  std::uint64_t default_seed = 1;
  int timeout_seconds = 30;

  /// Overrides from ELICIT_BIND (host:port), ELICIT_DATA_DIR,
  /// ELICIT_DEFAULT_N, ELICIT_SEED_POLICY and ELICIT_TOKEN.
  void apply_environment();
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::string body;
  std::map<std::string, std::string> query;
  /// Header names in lower case.
  std::map<std::string, std::string> headers;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// HTTP status for an engine error kind.
int http_status(ErrorKind kind);

class Service {
 public:
  explicit Service(ServiceConfig config);

  ApiResponse handle(const ApiRequest& request);

  /// Registers the /v1 routes on `server`.
  void install(httplib::Server& server);
  /// Blocks serving on config.host:config.port.
  void serve();

  std::size_t session_count() const;
  const ServiceConfig& config() const { return config_; }

 private:
  struct Entry {
    std::mutex mutex;
    Session session;
    explicit Entry(Session s) : session(std::move(s)) {}
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  void persist(const std::string& id, const Session& session) const;
  void recover();
  std::string new_id();
  std::uint64_t new_seed();

  ApiResponse create_session(const ApiRequest& request);
  ApiResponse mutate(const std::string& id, const std::string& op,
                     const json& body);
  json resource(const std::string& id, const Session& session) const;

  ServiceConfig config_;
  mutable std::shared_mutex store_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace elicit
