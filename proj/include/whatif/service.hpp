#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "whatif/sketch_io.hpp"

namespace whatif {

struct RegisteredSketch {
  std::string id;
  std::string checksum;
  std::shared_ptr<const SketchContainer> container;

  nlohmann::json metadata() const;
};

struct RegisterResult {
  RegisteredSketch entry;
  bool created = false;
};

class SketchRegistry {
 public:
  // Idempotent on the container checksum. Throws Error (load failures) and
  // RegistryConflict when `id` is taken by a different container.
  RegisterResult add(const std::string& bytes, std::optional<std::string> id = std::nullopt);
  std::optional<RegisteredSketch> find(const std::string& id) const;
  std::vector<RegisteredSketch> list() const;
  // Loads every *.json file of a directory; returns the ids.
  std::vector<std::string> load_directory(const std::string& dir, std::ostream* log = nullptr);

 private:
  mutable std::shared_mutex mutex_;
  std::vector<RegisteredSketch> entries_;
};

struct RegistryConflict : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// HTTP front end over a registry. The handlers only ever see containers.
class ScenarioService {
 public:
  explicit ScenarioService(SketchRegistry& registry, std::ostream* log = nullptr);
  ~ScenarioService();
  ScenarioService(const ScenarioService&) = delete;
  ScenarioService& operator=(const ScenarioService&) = delete;

  // Blocks until stop(). Returns false when the port cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and serves on a background thread; returns the port or -1.
  int start(const std::string& host = "127.0.0.1");
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace whatif
