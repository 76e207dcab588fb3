#include "elicit/service.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "httplib.h"

#include "elicit/error.hpp"
#include "elicit/transcript.hpp"

namespace elicit {

namespace {

ApiResponse json_response(int status, const json& body) {
  return {status, canonical_dump(body) + "\n", "application/json"};
}

ApiResponse error_response(int status, ErrorKind kind, const std::string& message,
                           const std::optional<Interval>& admissible = {}) {
  json err = {{"kind", to_string(kind)}, {"message", message}};
  if (admissible) err["admissible"] = {{"lo", admissible->lo}, {"hi", admissible->hi}};
  return json_response(status, {{"error", err}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
  return true;
}

// Route segment -> session operation.
const std::map<std::string, std::string>& mutation_routes() {
  static const std::map<std::string, std::string> routes = {
      {"random-component", "assess_dispersion"},
      {"power-parameter", "assess_power"},
      {"marginals", "assess_marginal"},
      {"conditioning-value", "choose_conditioning"},
      {"conditional-medians", "assess_conditional_median"},
      {"truncate", "truncate"},
      {"conclude", "conclude"},
      {"induce", "induce"},
      {"events", ""},
  };
  return routes;
}

json next_actions(const SessionPhase& phase) {
  switch (phase.kind) {
    case PhaseKind::setup: return json::array();
    case PhaseKind::random_component: return {"random-component"};
    case PhaseKind::power_parameter: return {"power-parameter"};
    case PhaseKind::marginals: return {"marginals"};
    case PhaseKind::vine_level:
      return phase.target ? json{"conditional-medians", "truncate"}
                          : json{"conditioning-value", "truncate"};
    case PhaseKind::truncated: return {"conclude", "induce"};
    case PhaseKind::concluded: return {"induce"};
  }
  return json::array();
}

std::optional<std::string> query(const ApiRequest& r, const std::string& key) {
  const auto it = r.query.find(key);
  if (it == r.query.end()) return {};
  return it->second;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::parse, "query parameter '" + what + "' must be a number");
}

std::uint64_t parse_unsigned(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used == s.size() && s.find('-') == std::string::npos) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::parse, "query parameter '" + what + "' must be a non-negative integer");
}

}  // namespace

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::illegal_transition:
    case ErrorKind::conflict:
      return 409;
    case ErrorKind::parse:
      return 400;
    case ErrorKind::io:
      return 500;
    default:
      return 422;
  }
}

void ServiceConfig::apply_environment() {
  if (const char* bind = std::getenv("ELICIT_BIND")) {
    const std::string b = bind;
    const auto colon = b.rfind(':');
    require(colon != std::string::npos, "ELICIT_BIND must be host:port", ErrorKind::parse);
    host = b.substr(0, colon);
    port = static_cast<int>(parse_unsigned(b.substr(colon + 1), "ELICIT_BIND port"));
  }
  if (const char* dir = std::getenv("ELICIT_DATA_DIR")) data_dir = dir;
  if (const char* n = std::getenv("ELICIT_DEFAULT_N"))
    max_diagnostic_n = parse_unsigned(n, "ELICIT_DEFAULT_N");
  if (const char* p = std::getenv("ELICIT_SEED_POLICY")) seed_policy = p;
  if (const char* t = std::getenv("ELICIT_TOKEN")) bearer_token = t;
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  require(config_.seed_policy == "fixed" || config_.seed_policy == "random",
          "service: seed policy must be 'fixed' or 'random'", ErrorKind::parse);
  if (config_.data_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*config_.data_dir, ec);
    require(!ec, "service: cannot create data directory " + config_.data_dir->string(),
            ErrorKind::io);
    recover();
  }
}

std::size_t Service::session_count() const {
  std::shared_lock lock(store_mutex_);
  return sessions_.size();
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) const {
  std::shared_lock lock(store_mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void Service::persist(const std::string& id, const Session& session) const {
  if (!config_.data_dir) return;
  const auto path = *config_.data_dir / (id + ".jsonl");
  const auto tmp = *config_.data_dir / (id + ".jsonl.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << save_transcript(session);
    require(static_cast<bool>(out), "service: cannot write " + tmp.string(), ErrorKind::io);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, "service: cannot replace " + path.string(), ErrorKind::io);
}

void Service::recover() {
  for (const auto& entry : std::filesystem::directory_iterator(*config_.data_dir)) {
    if (entry.path().extension() != ".jsonl") continue;
    const std::string id = entry.path().stem().string();
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    sessions_[id] = std::make_shared<Entry>(load_and_replay(buf.str()));
  }
}

std::string Service::new_id() {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  for (;;) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(gen()));
    if (!sessions_.count(buf)) return buf;
  }
}

std::uint64_t Service::new_seed() {
  if (config_.seed_policy == "fixed") return config_.default_seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

json Service::resource(const std::string& id, const Session& session) const {
  json out = {{"id", id},
              {"phase", session.phase().to_json()},
              {"events", session.events().size()},
              {"seed", session.seed()},
              {"next_actions", next_actions(session.phase())},
              {"snapshot", session.snapshot()}};
  if (session.phase().kind != PhaseKind::setup) {
    const ScenarioSet& sc = session.config().scenarios;
    out["scenarios"] = {{"n", sc.n()},
                        {"names", sc.names},
                        {"link", sc.link.name()},
                        {"U", to_json(Eigen::MatrixXd(sc.U))},
                        {"descriptions", sc.descriptions}};
  }
  return out;
}

ApiResponse Service::create_session(const ApiRequest& request) {
  const json body = request.body.empty() ? json::object() : json::parse(request.body);
  require(body.is_object(), "request body must be a JSON object", ErrorKind::parse);
  require(body.contains("config"), "missing 'config'", ErrorKind::parse);
  const std::uint64_t seed =
      body.contains("seed") ? body["seed"].get<std::uint64_t>() : new_seed();
  Session session(seed);
  EventRequest ev;
  ev.op = "setup";
  ev.inputs = body["config"];
  ev.id = body.value("event_id", "");
  ev.timestamp = body.value("timestamp", "");
  ev.synthetic = body.value("synthetic", false);
  session.apply(ev);

  std::unique_lock lock(store_mutex_);
  std::string id;
  if (body.contains("id")) {
    id = body["id"].get<std::string>();
    require(valid_id(id), "session id must be 1-64 characters of [A-Za-z0-9_-]",
            ErrorKind::parse);
    require(!sessions_.count(id), "session '" + id + "' already exists", ErrorKind::conflict);
  } else {
    id = new_id();
  }
  auto entry = std::make_shared<Entry>(std::move(session));
  persist(id, entry->session);
  sessions_[id] = entry;
  json out = {{"session", resource(id, entry->session)},
              {"event", entry->session.events().back().to_json()},
              {"feedback", entry->session.feedback()}};
  return json_response(201, out);
}

ApiResponse Service::mutate(const std::string& id, const std::string& op,
                            const json& body) {
  const auto entry = find(id);
  if (!entry) return error_response(404, ErrorKind::domain, "unknown session '" + id + "'");
  require(body.is_object(), "request body must be a JSON object", ErrorKind::parse);
  EventRequest ev;
  json inputs = body;
  if (op.empty()) {
    ev.op = body.value("op", "");
    inputs = body.value("inputs", json::object());
  } else if (op == "assess_dispersion" && !body.contains("d1")) {
    ev.op = "set_dispersion";
  } else {
    ev.op = op;
  }
  for (const char* meta : {"event_id", "id", "timestamp", "synthetic"}) {
    if (!body.contains(meta)) continue;
    const json& v = body[meta];
    if (std::string(meta) == "synthetic") {
      ev.synthetic = v.get<bool>();
    } else if (std::string(meta) == "timestamp") {
      ev.timestamp = v.get<std::string>();
    } else {
      ev.id = v.get<std::string>();
    }
    if (!op.empty()) inputs.erase(meta);
  }
  ev.inputs = inputs;

  std::lock_guard lock(entry->mutex);
  Session next = entry->session;
  const EventRecord rec = next.apply(ev);
  persist(id, next);
  entry->session = std::move(next);
  json out = {{"session", resource(id, entry->session)},
              {"event", rec.to_json()},
              {"feedback", entry->session.feedback()}};
  return json_response(200, out);
}

ApiResponse Service::handle(const ApiRequest& request) {
  try {
    if (config_.bearer_token) {
      const auto it = request.headers.find("authorization");
      if (it == request.headers.end() || it->second != "Bearer " + *config_.bearer_token)
        return error_response(401, ErrorKind::domain, "missing or invalid bearer token");
    }
    const auto parts = split_path(request.path);
    if (parts.size() < 2 || parts[0] != "v1")
      return error_response(404, ErrorKind::domain, "no route " + request.path);

    if (parts[1] == "schema" && parts.size() == 3 && parts[2] == "transcript" &&
        request.method == "GET")
      return {200, transcript_schema(), "application/schema+json"};

    if (parts[1] != "sessions")
      return error_response(404, ErrorKind::domain, "no route " + request.path);

    if (parts.size() == 2) {
      if (request.method == "POST") return create_session(request);
      if (request.method == "GET") {
        std::shared_lock lock(store_mutex_);
        json ids = json::array();
        for (const auto& [id, e] : sessions_) ids.push_back(id);
        return json_response(200, {{"sessions", ids}});
      }
      return error_response(405, ErrorKind::domain, "method not allowed");
    }

    const std::string& id = parts[2];
    const auto entry = find(id);
    if (!entry) return error_response(404, ErrorKind::domain, "unknown session '" + id + "'");

    if (request.method == "GET") {
      std::lock_guard lock(entry->mutex);
      const Session& s = entry->session;
      if (parts.size() == 3) return json_response(200, resource(id, s));
      if (parts.size() == 4 && parts[3] == "feedback") {
        int grid = s.config().grid_size;
        std::vector<double> probs = s.config().feedback_probs;
        if (const auto g = query(request, "grid"))
          grid = static_cast<int>(parse_unsigned(*g, "grid"));
        if (const auto p = query(request, "probs")) {
          probs.clear();
          std::stringstream ss(*p);
          std::string item;
          while (std::getline(ss, item, ',')) probs.push_back(parse_double(item, "probs"));
        }
        return json_response(200, s.feedback(grid, probs));
      }
      if (parts.size() == 4 && parts[3] == "diagnostics") {
        std::size_t n = config_.max_diagnostic_n;
        if (const auto q = query(request, "n")) n = parse_unsigned(*q, "n");
        if (n > config_.max_diagnostic_n)
          return error_response(422, ErrorKind::domain,
                                "n exceeds the service cap of " +
                                    std::to_string(config_.max_diagnostic_n) +
                                    "; run larger diagnostics with the CLI",
                                Interval{1.0, static_cast<double>(config_.max_diagnostic_n)});
        require(n >= 1, "n must be positive");
        std::optional<std::uint64_t> seed;
        if (const auto q = query(request, "seed")) seed = parse_unsigned(*q, "seed");
        double alpha = 0.05;
        if (const auto q = query(request, "alpha")) alpha = parse_double(*q, "alpha");
        // The facilitator asks for this check explicitly; families without
        // convolution closure are flagged in the response instead.
        const bool ack = query(request, "acknowledge_no_convolution").value_or("true") != "false";
        const DiscrepancyReport rep = session_diagnostics(s, n, seed, alpha, ack);
        json out = to_json(rep);
        out["mu0"] = *s.dispersion().mu0;
        out["w"] = *s.dispersion().w;
        out["family"] = s.family().name();
        out["convolution_approximation"] = !s.family().supports_convolution();
        return json_response(200, out);
      }
      if (parts.size() == 4 && parts[3] == "transcript")
        return {200, save_transcript(s), "application/x-ndjson"};
      return error_response(404, ErrorKind::domain, "no route " + request.path);
    }

    if (request.method == "POST" && parts.size() == 4) {
      const auto it = mutation_routes().find(parts[3]);
      if (it == mutation_routes().end())
        return error_response(404, ErrorKind::domain, "no route " + request.path);
      const json body = request.body.empty() ? json::object() : json::parse(request.body);
      return mutate(id, it->second, body);
    }
    return error_response(405, ErrorKind::domain, "method not allowed");
  } catch (const Error& e) {
    return error_response(http_status(e.kind()), e.kind(), e.what(), e.admissible());
  } catch (const json::exception& e) {
    return error_response(400, ErrorKind::parse, e.what());
  } catch (const std::exception& e) {
    return error_response(500, ErrorKind::numerical, e.what());
  }
}

void Service::install(httplib::Server& server) {
  const auto bridge = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    r.body = req.body;
    for (const auto& [k, v] : req.params) r.query[k] = v;
    for (const auto& [k, v] : req.headers) {
      std::string key = k;
      for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      r.headers[key] = v;
    }
    const ApiResponse out = handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  server.Get(R"(/v1/.*)", bridge);
  server.Post(R"(/v1/.*)", bridge);
  server.set_read_timeout(config_.timeout_seconds, 0);
  server.set_write_timeout(config_.timeout_seconds, 0);
}

void Service::serve() {
  httplib::Server server;
  install(server);
  require(server.listen(config_.host, config_.port),
          "service: cannot listen on " + config_.host + ":" + std::to_string(config_.port),
          ErrorKind::io);
}

}  // namespace elicit
