#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "annotweave/core/model.hpp"
#include "annotweave/service/mutations.hpp"

namespace httplib {
class Server;
}

namespace annotweave {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Projects are opened by paths relative to this directory and may not escape it.
  std::filesystem::path projects_root = ".";
  /// Directory of category list files used by the exporters.
  std::filesystem::path category_dir;
  std::chrono::seconds session_idle_timeout{600};
  int preview_max_side = 640;
  bool log_requests = true;
};

/// Overrides `base.port` from PORT and `base.projects_root` from PROJECTS_ROOT when set.
/// Throws Error(InvalidArgument) for a non-numeric PORT.
[[nodiscard]] ServiceConfig config_from_environment(ServiceConfig base);

/// Immutable view of one project; readers keep it alive while writers publish a successor.
struct ProjectSnapshot {
  Project project;
  AnnotationStore store;
};

/// HTTP adapter over the library modules. Holds open projects, their write locks,
/// request logs and interactive segmentation sessions.
class AnnotationService {
 public:
  explicit AnnotationService(ServiceConfig config);
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  /// Registers every /api route on `server`.
  void mount(httplib::Server& server);

  [[nodiscard]] const ServiceConfig& config() const { return config_; }

  /// State of an open project when it was opened, and now. Throws Error(NotFound).
  [[nodiscard]] std::shared_ptr<const ProjectSnapshot> initial_snapshot(const std::string& project_id) const;
  [[nodiscard]] std::shared_ptr<const ProjectSnapshot> snapshot(const std::string& project_id) const;
  /// Mutations applied since open, in order.
  [[nodiscard]] std::vector<Mutation> request_log(const std::string& project_id) const;

 private:
  struct Impl;
  ServiceConfig config_;
  std::unique_ptr<Impl> impl_;
};

/// Blocks serving HTTP until SIGINT or SIGTERM. Returns a process exit code.
int serve(const ServiceConfig& config);

}  // namespace annotweave
