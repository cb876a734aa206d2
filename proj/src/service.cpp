#include "whatif/service.hpp"

#include <chrono>
#include <filesystem>
#include <mutex>

#include "httplib.h"
#include "whatif/dataset.hpp"

namespace whatif {

nlohmann::json RegisteredSketch::metadata() const {
  const SketchContainer& c = *container;
  nlohmann::json m;
  m["sketchId"] = id;
  m["checksum"] = checksum;
  m["kind"] = std::string(to_string(c.kind));
  m["k"] = c.k();
  m["epsilon"] = c.parameters.value("epsilon", 0.0);
  m["delta"] = c.parameters.value("delta", 0.0);
  m["labels"] = c.labels();
  if (c.parameters.contains("numericKind")) m["numericKind"] = c.parameters["numericKind"];
  return m;
}

RegisterResult SketchRegistry::add(const std::string& bytes, std::optional<std::string> id) {
  auto container = std::make_shared<const SketchContainer>(load(bytes));
  const std::string sum = nlohmann::json::parse(bytes).at("checksum").get<std::string>();
  std::unique_lock lock(mutex_);
  for (const auto& e : entries_) {
    if (id && e.id == *id) {
      if (e.checksum != sum) throw RegistryConflict("sketch id '" + *id + "' already holds a different container");
      return {e, false};
    }
    if (!id && e.checksum == sum) return {e, false};
  }
  RegisteredSketch entry{id.value_or(sum.substr(0, 16)), sum, std::move(container)};
  entries_.push_back(entry);
  return {entry, true};
}

std::optional<RegisteredSketch> SketchRegistry::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  for (const auto& e : entries_)
    if (e.id == id) return e;
  return std::nullopt;
}

std::vector<RegisteredSketch> SketchRegistry::list() const {
  std::shared_lock lock(mutex_);
  return entries_;
}

std::vector<std::string> SketchRegistry::load_directory(const std::string& dir, std::ostream* log) {
  std::vector<std::filesystem::path> files;
  for (const auto& f : std::filesystem::directory_iterator(dir))
    if (f.is_regular_file() && f.path().extension() == ".json") files.push_back(f.path());
  std::sort(files.begin(), files.end());
  std::vector<std::string> ids;
  for (const auto& f : files) {
    try {
      ids.push_back(add(read_file(f.string())).entry.id);
    } catch (const std::exception& e) {
      if (log) *log << nlohmann::json{{"event", "skip"}, {"file", f.string()}, {"error", e.what()}}.dump() << "\n";
    }
  }
  return ids;
}

struct ScenarioService::Impl {
  SketchRegistry& registry;
  std::ostream* log;
  std::mutex log_mutex;
  httplib::Server server;

  Impl(SketchRegistry& r, std::ostream* l) : registry(r), log(l) { routes(); }

  static void reply(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void fail(httplib::Response& res, int status, const std::string& message) {
    reply(res, status, {{"error", message}});
  }

  void routes() {
    server.Post("/sketches", [this](const httplib::Request& req, httplib::Response& res) { post_sketch(req, res); });
    server.Get("/sketches", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& e : registry.list()) out.push_back(e.metadata());
      reply(res, 200, out);
    });
    server.Get(R"(/sketches/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto e = registry.find(req.matches[1]);
      if (!e) return fail(res, 404, "unknown sketch '" + std::string(req.matches[1]) + "'");
      reply(res, 200, e->metadata());
    });
    server.Post(R"(/sketches/([^/]+)/answer)",
                [this](const httplib::Request& req, httplib::Response& res) { post_answer(req, res); });
    server.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
      if (!log) return;
      const nlohmann::json line{{"method", req.method}, {"path", req.path}, {"status", res.status},
                                {"bytes", res.body.size()}};
      std::lock_guard lock(log_mutex);
      *log << line.dump() << std::endl;
    });
  }

  void post_sketch(const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      return fail(res, 400, "request body is not JSON");
    }
    std::optional<std::string> id;
    std::string bytes;
    try {
      if (body.is_object() && body.contains("formatVersion")) {
        bytes = body.dump();
      } else if (body.is_object() && body.contains("container")) {
        const auto& c = body.at("container");
        bytes = c.is_string() ? c.get<std::string>() : c.dump();
      } else if (body.is_object() && body.contains("path")) {
        bytes = read_file(body.at("path").get<std::string>());
      } else {
        return fail(res, 400, "body must be a container, {container}, or {path}");
      }
      if (body.contains("id")) id = body.at("id").get<std::string>();
      const RegisterResult r = registry.add(bytes, id);
      reply(res, r.created ? 201 : 200, r.entry.metadata());
    } catch (const RegistryConflict& e) {
      fail(res, 409, e.what());
    } catch (const std::exception& e) {
      fail(res, 400, e.what());
    }
  }

  void post_answer(const httplib::Request& req, httplib::Response& res) {
    const auto entry = registry.find(req.matches[1]);
    if (!entry) return fail(res, 404, "unknown sketch '" + std::string(req.matches[1]) + "'");
    Scenario s;
    AnswerParams params;
    try {
      const auto body = nlohmann::json::parse(req.body);
      const auto idx = body.at("scenario").get<std::vector<long long>>();
      s = Scenario::from_one_based(idx);
      if (body.contains("phi") && !body.at("phi").is_null()) params.phi = body.at("phi").get<double>();
      if (body.contains("rankOf") && !body.at("rankOf").is_null()) params.rank_of = body.at("rankOf").get<double>();
    } catch (const Error& e) {
      return fail(res, 422, e.what());
    } catch (const std::exception& e) {
      return fail(res, 400, std::string("bad answer request: ") + e.what());
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
      nlohmann::json out = answer(*entry->container, s, params).to_json();
      out["latencyMs"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      reply(res, 200, out);
    } catch (const Error& e) {
      fail(res, 422, e.what());
    }
  }
};

ScenarioService::ScenarioService(SketchRegistry& registry, std::ostream* log)
    : impl_(std::make_unique<Impl>(registry, log)) {}

ScenarioService::~ScenarioService() { stop(); }

bool ScenarioService::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int ScenarioService::start(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port < 0) return -1;
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void ScenarioService::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace whatif
