#include "annotweave/service/server.hpp"

#include <csignal>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "annotweave/core/error.hpp"
#include "annotweave/core/validate.hpp"
#include "annotweave/exporters/categories.hpp"
#include "annotweave/exporters/exporters.hpp"
#include "annotweave/mask/filters.hpp"
#include "annotweave/mask/grabcut.hpp"
#include "annotweave/registration/homography.hpp"
#include "annotweave/sequence/sequence.hpp"
#include "annotweave/service/json_codec.hpp"
#include "annotweave/storage/frames.hpp"
#include "annotweave/storage/png_io.hpp"
#include "annotweave/storage/project_io.hpp"

namespace annotweave {

namespace fs = std::filesystem;
using nlohmann::json;
using wire::field;
using wire::field_or;
using Clock = std::chrono::steady_clock;

namespace {

std::mutex g_log_mutex;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

void log_event(json entry) {
  entry["ts"] = utc_timestamp();
  const std::string line = entry.dump();
  std::lock_guard<std::mutex> guard(g_log_mutex);
  std::cerr << line << '\n';
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownId: return 404;
    case ErrorCode::Locked:
    case ErrorCode::FieldInUse:
    case ErrorCode::OverlappingObjects:
    case ErrorCode::ConfirmationRequired:
    case ErrorCode::IdSpaceExhausted: return 409;
    case ErrorCode::CorruptCsv: return 422;
    case ErrorCode::IoFailure: return 500;
    default: return 400;
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, "request body is not valid JSON", e.what());
  }
}

int int_param(const httplib::Request& req, const char* name, std::optional<int> fallback = std::nullopt) {
  if (!req.has_param(name)) {
    if (fallback) return *fallback;
    throw Error(ErrorCode::InvalidArgument, std::string("missing query parameter '") + name + "'", name);
  }
  const std::string v = req.get_param_value(name);
  try {
    std::size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, std::string("query parameter '") + name + "' must be an integer", name);
  }
}

int path_int(const httplib::Request& req, std::size_t group) {
  try {
    return std::stoi(req.matches[group].str());
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "path index out of range", req.matches[group].str());
  }
}

/// `base / relative`, refusing absolute paths and paths that leave `base`.
fs::path resolve_under(const fs::path& base, const std::string& relative) {
  if (relative.empty()) throw Error(ErrorCode::InvalidArgument, "empty path");
  const fs::path rel(relative);
  if (rel.is_absolute()) throw Error(ErrorCode::InvalidArgument, "path must be relative", relative);
  const fs::path root = fs::weakly_canonical(fs::absolute(base));
  const fs::path full = fs::weakly_canonical(root / rel);
  const auto [r, f] = std::mismatch(root.begin(), root.end(), full.begin(), full.end());
  if (r != root.end()) throw Error(ErrorCode::InvalidArgument, "path escapes its root", relative);
  return full;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string(), path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> thermal_frames(const Project& p) {
  if (!p.modalities.thermal) return {};
  const fs::path dir = p.root_dir / p.modalities.thermal->dir;
  if (!fs::is_directory(dir)) return {};
  std::vector<std::string> out;
  for (auto& f : scan_frames(dir, p.modalities.thermal->pattern).files) {
    if (!is_mask_artifact(f)) out.push_back(std::move(f));
  }
  return out;
}

fs::path frame_image_path(const Project& p, int idx, const std::string& modality) {
  if (modality == "rgb") return p.root_dir / p.modalities.rgb.dir / p.frame_files[idx];
  if (modality == "thermal") {
    const auto files = thermal_frames(p);
    if (idx >= static_cast<int>(files.size())) {
      throw Error(ErrorCode::NotFound, "no thermal image for frame " + std::to_string(idx), std::to_string(idx));
    }
    return p.root_dir / p.modalities.thermal->dir / files[idx];
  }
  throw Error(ErrorCode::InvalidArgument, "modality must be rgb or thermal", modality);
}

json skipped_json(const std::vector<SkippedObject>& skipped) {
  json out = json::array();
  for (const auto& s : skipped) {
    out.push_back({{"frame", s.frame}, {"id", s.id.value}, {"tag", s.tag}, {"reason", s.reason}});
  }
  return out;
}

json grabcut_json(const std::string& token, int frame, const GrabCutResult& r) {
  json trace = json::array();
  for (const auto& e : r.energy_trace) trace.push_back({{"before", e.before}, {"after", e.after}});
  return json{{"session", token},       {"frame", frame},          {"mask", wire::to_json(rle_encode(r.mask))},
              {"collapsed", r.collapsed}, {"warnings", r.warnings}, {"energy_trace", std::move(trace)}};
}

struct OpenProject {
  std::string id;
  fs::path root;
  std::unique_ptr<ProjectLock> lock;  // null when another writer holds the project
  std::vector<std::string> warnings;
  std::shared_ptr<const ProjectSnapshot> initial;

  std::mutex write_mutex;  // serialises mutations; guards `log`
  std::vector<Mutation> log;

  mutable std::mutex snap_mutex;
  std::shared_ptr<const ProjectSnapshot> snap;

  [[nodiscard]] std::shared_ptr<const ProjectSnapshot> current() const {
    std::lock_guard<std::mutex> guard(snap_mutex);
    return snap;
  }
  void publish(std::shared_ptr<const ProjectSnapshot> next) {
    std::lock_guard<std::mutex> guard(snap_mutex);
    snap = std::move(next);
  }
};

struct Session {
  std::string project_id;
  int frame = 0;
  std::mutex mutex;  // guards the fields below
  GrabCutState state;
  Bitmask mask;
  bool collapsed = false;
  Clock::time_point last_used;
};

}  // namespace

struct AnnotationService::Impl {
  const ServiceConfig& config;
  mutable std::mutex mutex;  // guards projects, by_root, sessions, next_id, rng
  std::map<std::string, std::shared_ptr<OpenProject>> projects;
  std::map<fs::path, std::string> by_root;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  int next_id = 1;
  std::mt19937_64 rng{std::random_device{}()};

  explicit Impl(const ServiceConfig& c) : config(c) {}

  std::shared_ptr<OpenProject> project(const std::string& id) const {
    std::lock_guard<std::mutex> guard(mutex);
    const auto it = projects.find(id);
    if (it == projects.end()) throw Error(ErrorCode::NotFound, "project '" + id + "' is not open", id);
    return it->second;
  }

  std::string new_token() {
    std::lock_guard<std::mutex> guard(mutex);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(rng()));
    return buf;
  }

  void expire_sessions() {
    const auto now = Clock::now();
    std::lock_guard<std::mutex> guard(mutex);
    for (auto it = sessions.begin(); it != sessions.end();) {
      std::unique_lock<std::mutex> busy(it->second->mutex, std::try_to_lock);
      const bool idle = busy.owns_lock() && now - it->second->last_used > config.session_idle_timeout;
      if (busy.owns_lock()) busy.unlock();
      it = idle ? sessions.erase(it) : std::next(it);
    }
  }

  std::shared_ptr<Session> session(const std::string& token) {
    expire_sessions();
    std::lock_guard<std::mutex> guard(mutex);
    const auto it = sessions.find(token);
    if (it == sessions.end()) throw Error(ErrorCode::NotFound, "segmentation session expired or unknown", token);
    return it->second;
  }

  json open(const json& body) {
    const fs::path root = resolve_under(config.projects_root, field<std::string>(body, "path"));
    if (!fs::is_directory(root)) throw Error(ErrorCode::NotFound, "no project directory " + root.string(), root.string());
    {
      std::lock_guard<std::mutex> guard(mutex);
      if (const auto it = by_root.find(root); it != by_root.end()) {
        const auto& p = projects.at(it->second);
        return describe(*p, true);
      }
    }
    LoadOptions options;
    if (const auto g = field_or<std::string>(body, "geometry", ""); !g.empty()) {
      if (g != "box" && g != "pixel") throw Error(ErrorCode::InvalidArgument, "geometry must be box or pixel", g);
      options.default_geometry = g == "box" ? GeometryKind::Box : GeometryKind::Pixel;
    }

    auto p = std::make_shared<OpenProject>();
    p->root = root;
    try {
      p->lock = std::make_unique<ProjectLock>(root);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Locked) throw;
    }
    LoadedProject loaded = p->lock ? open_project(root, options) : load_project(root, options);
    p->warnings = std::move(loaded.warnings);
    if (!p->lock) p->warnings.push_back("Locked: opened read-only because another writer holds the project");
    auto snap = std::make_shared<const ProjectSnapshot>(ProjectSnapshot{std::move(loaded.project), std::move(loaded.store)});
    p->initial = snap;
    p->snap = snap;

    std::lock_guard<std::mutex> guard(mutex);
    p->id = "p" + std::to_string(next_id++);
    projects.emplace(p->id, p);
    by_root.emplace(root, p->id);
    log_event({{"level", "info"}, {"event", "project_open"}, {"project", p->id}, {"root", root.string()},
               {"read_only", !p->lock}});
    return describe(*p, false);
  }

  json describe(const OpenProject& p, bool already_open) const {
    const auto s = p.current();
    return json{{"project", p.id},
                {"root", p.root.string()},
                {"read_only", !p.lock},
                {"already_open", already_open},
                {"geometry", to_string(s->project.geometry_kind)},
                {"frame_count", s->store.size()},
                {"warnings", p.warnings}};
  }

  json close(const std::string& id) {
    std::lock_guard<std::mutex> guard(mutex);
    const auto it = projects.find(id);
    if (it == projects.end()) throw Error(ErrorCode::NotFound, "project '" + id + "' is not open", id);
    by_root.erase(it->second->root);
    for (auto s = sessions.begin(); s != sessions.end();) {
      s = s->second->project_id == id ? sessions.erase(s) : std::next(s);
    }
    projects.erase(it);
    log_event({{"level", "info"}, {"event", "project_close"}, {"project", id}});
    return json{{"closed", id}};
  }

  json mutate(const std::string& id, const Mutation& m) {
    auto p = project(id);
    if (!p->lock) {
      throw Error(ErrorCode::Locked, "project is open read-only; another writer holds it", p->root.string());
    }
    std::lock_guard<std::mutex> guard(p->write_mutex);
    const auto before = p->current();
    MutationResult r = apply_mutation(before->project, before->store, m);
    json reply = std::move(r.reply);
    reply["changed"] = r.changed;
    reply["affected_frames"] = r.affected_frames;
    json frames = json::array();
    for (const int f : r.affected_frames) frames.push_back(wire::to_json(r.store.frames[f]));
    reply["frames"] = std::move(frames);
    if (m.args.contains("frame") && m.args.at("frame").is_number_integer()) {
      const int f = m.args.at("frame").get<int>();
      if (r.store.in_range(f)) reply["frame"] = wire::to_json(r.store.frames[f]);
    }
    if (r.changed) {
      save_project(r.project, r.store);
      p->log.push_back(m);
      p->publish(std::make_shared<const ProjectSnapshot>(ProjectSnapshot{std::move(r.project), std::move(r.store)}));
      log_event({{"level", "info"}, {"event", "mutation"}, {"project", id}, {"op", m.op}});
    }
    return reply;
  }

  json settings(const ProjectSnapshot& s) const {
    const Project& p = s.project;
    json out{{"geometry", to_string(p.geometry_kind)},
             {"user_tags", p.suggested_tags},
             {"suggested_tags", tag_suggestions(p, s.store)},
             {"limit_tags", p.limit_tags},
             {"meta_schema", p.meta_schema.names},
             {"dontcare_border_width", p.dontcare_border_width},
             {"frame_pattern", p.modalities.rgb.pattern},
             {"rgb_dir", p.modalities.rgb.dir},
             {"homography_file", p.homography_file},
             {"has_dontcare_mask", p.dontcare_mask.has_value()}};
    out["image_size"] = p.image_size ? json{{"width", p.image_size->width}, {"height", p.image_size->height}}
                                     : json(nullptr);
    out["thermal"] = p.modalities.thermal
                         ? json{{"dir", p.modalities.thermal->dir}, {"pattern", p.modalities.thermal->pattern}}
                         : json(nullptr);
    return out;
  }

  json thermal_overlay(const ProjectSnapshot& s, int idx) const {
    const Project& p = s.project;
    if (p.homography_file.empty()) throw Error(ErrorCode::NotFound, "project has no homography file");
    const HomographyPair pair = load_homographies(p.root_dir / p.homography_file, MissingMatrix::DeriveByInversion);
    const ImageSize target = read_png_size(frame_image_path(p, idx, "thermal"));
    const FrameAnnotations& frame = s.store.frames[idx];
    json objects = json::array();
    json warnings = json::array();
    if (!pair.warning.empty()) warnings.push_back(pair.warning);
    for (const auto& obj : frame.objects) {
      AnnotatedObject mapped = obj;
      try {
        if (const auto* box = std::get_if<BoundingBox>(&obj.geometry)) {
          mapped.geometry = map_box(pair.rgb_to_thermal, *box, target);
        } else if (const auto* poly = std::get_if<Polygon>(&obj.geometry)) {
          Polygon out;
          for (const auto& pt : poly->points) out.points.push_back(pair.rgb_to_thermal.map(pt));
          mapped.geometry = std::move(out);
        } else {
          mapped.geometry = map_mask(pair.rgb_to_thermal, std::get<PixelMask>(obj.geometry), target);
        }
      } catch (const Error& e) {
        warnings.push_back(std::string(to_string(e.code())) + ": object " + std::to_string(obj.id.value));
        continue;
      }
      objects.push_back(wire::to_json(mapped));
    }
    return json{{"index", idx},         {"file", frame.image_file}, {"modality", "thermal"},
                {"objects", objects}, {"warnings", warnings},
                {"image_size", {{"width", target.width}, {"height", target.height}}}};
  }

  CategoryLists category_lists() const {
    if (config.category_dir.empty() || !fs::is_directory(config.category_dir)) {
      throw Error(ErrorCode::NotFound, "no category list directory configured");
    }
    return load_category_lists(config.category_dir);
  }

  static const ProjectSnapshot& check_frame(const ProjectSnapshot& s, int idx) {
    if (!s.store.in_range(idx)) {
      throw Error(ErrorCode::NotFound, "frame " + std::to_string(idx) + " does not exist", std::to_string(idx));
    }
    return s;
  }
};

namespace {

using JsonHandler = std::function<json(const httplib::Request&)>;

void send_error(httplib::Response& res, const Error& e) {
  res.status = http_status(e.code());
  res.set_content(wire::error_envelope(e).dump(), "application/json");
}

httplib::Server::Handler json_route(JsonHandler handler) {
  return [handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
    try {
      res.set_content(handler(req).dump(), "application/json");
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, Error(ErrorCode::InvalidArgument, "malformed request", e.what()));
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"code", "Internal"}, {"message", e.what()}, {"details", ""}}.dump(), "application/json");
    }
  };
}

}  // namespace

ServiceConfig config_from_environment(ServiceConfig base) {
  if (const char* port = std::getenv("PORT"); port != nullptr && *port != '\0') {
    char* end = nullptr;
    const long v = std::strtol(port, &end, 10);
    if (*end != '\0' || v < 0 || v > 65535) throw Error(ErrorCode::InvalidArgument, "PORT must be 0-65535", port);
    base.port = static_cast<int>(v);
  }
  if (const char* root = std::getenv("PROJECTS_ROOT"); root != nullptr && *root != '\0') base.projects_root = root;
  return base;
}

AnnotationService::AnnotationService(ServiceConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>(config_)) {}

AnnotationService::~AnnotationService() = default;

std::shared_ptr<const ProjectSnapshot> AnnotationService::initial_snapshot(const std::string& project_id) const {
  return impl_->project(project_id)->initial;
}

std::shared_ptr<const ProjectSnapshot> AnnotationService::snapshot(const std::string& project_id) const {
  return impl_->project(project_id)->current();
}

std::vector<Mutation> AnnotationService::request_log(const std::string& project_id) const {
  auto p = impl_->project(project_id);
  std::lock_guard<std::mutex> guard(p->write_mutex);
  return p->log;
}

void AnnotationService::mount(httplib::Server& server) {
  Impl& s = *impl_;
  const std::string P = R"(/api/projects/([^/]+))";
  const std::string F = P + R"(/frames/(\d+))";
  const std::string O = F + R"(/objects/(-?\d+))";

  auto frame_mutation = [&s](const httplib::Request& req, const std::string& op, json args) {
    args["frame"] = path_int(req, 2);
    return s.mutate(req.matches[1], Mutation{op, std::move(args)});
  };
  auto object_mutation = [&s](const httplib::Request& req, const std::string& op, json args) {
    args["frame"] = path_int(req, 2);
    args["id"] = std::stoll(req.matches[3].str());
    return s.mutate(req.matches[1], Mutation{op, std::move(args)});
  };
  auto project_mutation = [&s](const std::string& op) {
    return json_route([&s, op](const httplib::Request& req) {
      return s.mutate(req.matches[1], Mutation{op, parse_body(req)});
    });
  };

  server.Get("/api/health", json_route([](const httplib::Request&) { return json{{"status", "ok"}}; }));

  server.Get("/api/category-lists", json_route([&s](const httplib::Request&) {
               const auto lists = s.category_lists();
               json out = json::array();
               for (const auto& l : lists.lists) out.push_back({{"name", l.name}, {"entries", l.entries}});
               return json{{"lists", out}, {"warnings", lists.warnings}};
             }));

  server.Get("/api/projects", json_route([&s](const httplib::Request&) {
               std::vector<std::shared_ptr<OpenProject>> open;
               {
                 std::lock_guard<std::mutex> guard(s.mutex);
                 for (const auto& [_, p] : s.projects) open.push_back(p);
               }
               json out = json::array();
               for (const auto& p : open) out.push_back(s.describe(*p, true));
               return json{{"projects", out}};
             }));

  server.Post("/api/projects/open", json_route([&s](const httplib::Request& req) { return s.open(parse_body(req)); }));

  server.Post(P + "/close", json_route([&s](const httplib::Request& req) { return s.close(req.matches[1]); }));

  server.Get(P, json_route([&s](const httplib::Request& req) {
               const auto p = s.project(req.matches[1]);
               json out = s.describe(*p, true);
               out["settings"] = s.settings(*p->current());
               return out;
             }));

  server.Get(P + "/frames", json_route([&s](const httplib::Request& req) {
               const auto snap = s.project(req.matches[1])->current();
               json out = json::array();
               for (const auto& f : snap->store.frames) {
                 out.push_back({{"index", f.frame_index}, {"file", f.image_file}, {"objects", f.objects.size()}});
               }
               return json{{"frames", out}};
             }));

  server.Get(F, json_route([&s](const httplib::Request& req) {
               const auto snap = s.project(req.matches[1])->current();
               const int idx = path_int(req, 2);
               Impl::check_frame(*snap, idx);
               const std::string modality = req.has_param("modality") ? req.get_param_value("modality") : "rgb";
               if (modality == "thermal") return s.thermal_overlay(*snap, idx);
               if (modality != "rgb") throw Error(ErrorCode::InvalidArgument, "modality must be rgb or thermal");
               json out = wire::to_json(snap->store.frames[idx]);
               out["modality"] = "rgb";
               return out;
             }));

  server.Get(F + "/image", [&s](const httplib::Request& req, httplib::Response& res) {
    try {
      const auto snap = s.project(req.matches[1])->current();
      const int idx = path_int(req, 2);
      Impl::check_frame(*snap, idx);
      const std::string modality = req.has_param("modality") ? req.get_param_value("modality") : "rgb";
      const fs::path path = frame_image_path(snap->project, idx, modality);
      const bool preview = req.has_param("preview") && req.get_param_value("preview") != "0";
      if (!preview) {
        res.set_content(read_file(path), "image/png");
        return;
      }
      const int side = int_param(req, "max_side", s.config.preview_max_side);
      if (side < 1) throw Error(ErrorCode::InvalidArgument, "max_side must be positive");
      const auto bytes = encode_png_rgb(downscale(read_png_rgb(path), side));
      res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
    } catch (const Error& e) {
      send_error(res, e);
    }
  });

  server.Post(F + "/objects", json_route([frame_mutation](const httplib::Request& req) {
                // Parsed before the initializer list: a throw inside one leaks its elements on GCC 11.
                json body = parse_body(req);
                return frame_mutation(req, "create_object", json{{"object", std::move(body)}});
              }));
  server.Patch(O, json_route([object_mutation](const httplib::Request& req) {
                 json body = parse_body(req);
                 body.erase("frame");
                 body.erase("id");
                 return object_mutation(req, "update_object", std::move(body));
               }));
  server.Delete(O, json_route([object_mutation](const httplib::Request& req) {
                  return object_mutation(req, "delete_object", json::object());
                }));
  server.Post(O + "/brush", json_route([object_mutation](const httplib::Request& req) {
                json body = parse_body(req);
                return object_mutation(req, "brush", json{{"brush", std::move(body)}});
              }));
  server.Post(O + "/filter", json_route([object_mutation](const httplib::Request& req) {
                json body = parse_body(req);
                body.erase("frame");
                body.erase("id");
                return object_mutation(req, "filter", std::move(body));
              }));
  server.Post(O + "/rasterize", json_route([object_mutation](const httplib::Request& req) {
                return object_mutation(req, "rasterize_polygon", json::object());
              }));

  server.Post(P + "/retain", project_mutation("retain"));
  server.Post(P + "/interpolate", project_mutation("interpolate"));
  server.Post(P + "/delete-forward", project_mutation("delete_forward"));
  server.Post(P + "/merge-forward", project_mutation("merge_forward"));
  server.Post(P + "/mutations", json_route([&s](const httplib::Request& req) {
                return s.mutate(req.matches[1], mutation_from_json(parse_body(req)));
              }));

  server.Get(P + "/log", json_route([this](const httplib::Request& req) {
               json out = json::array();
               for (const auto& m : request_log(req.matches[1])) out.push_back(to_json(m));
               return json{{"mutations", out}};
             }));

  server.Get(P + "/history", json_route([&s](const httplib::Request& req) {
               const auto snap = s.project(req.matches[1])->current();
               const ObjectId id{int_param(req, "id")};
               const int center = int_param(req, "frame");
               const int radius = int_param(req, "radius", kDefaultHistoryRadius);
               if (radius < 0) throw Error(ErrorCode::InvalidArgument, "radius must be >= 0");
               json slots = json::array();
               for (const auto& slot : history_window(snap->store, id, center, radius)) {
                 slots.push_back(slot ? json{{"frame", slot->frame}, {"box", wire::to_json(slot->box)}} : json(nullptr));
               }
               return json{{"id", id.value}, {"center", center}, {"slots", slots}};
             }));

  server.Get(P + "/settings", json_route([&s](const httplib::Request& req) {
               return s.settings(*s.project(req.matches[1])->current());
             }));
  server.Put(P + "/settings/tags", project_mutation("set_tags"));
  server.Put(P + "/settings/meta-schema", project_mutation("set_meta_schema"));
  server.Put(P + "/settings/border-width", project_mutation("set_border_width"));
  server.Put(P + "/settings/frame-pattern", json_route([&s](const httplib::Request& req) {
               const json body = parse_body(req);
               const auto pattern = field<std::string>(body, "pattern");
               const auto snap = s.project(req.matches[1])->current();
               const fs::path dir = snap->project.root_dir / snap->project.modalities.rgb.dir;
               std::vector<std::string> frames;
               for (auto& f : scan_frames(dir, pattern).files) {
                 if (!is_mask_artifact(f)) frames.push_back(std::move(f));
               }
               return s.mutate(req.matches[1], Mutation{"set_frame_pattern", {{"pattern", pattern}, {"frames", frames}}});
             }));

  server.Post(P + "/export/yolo", json_route([&s](const httplib::Request& req) {
                const json body = parse_body(req);
                const auto snap = s.project(req.matches[1])->current();
                const auto lists = s.category_lists();
                const auto name = field<std::string>(body, "categories");
                const CategoryList* list = lists.find(name);
                if (list == nullptr) throw Error(ErrorCode::NotFound, "unknown category list '" + name + "'", name);
                const auto out = field_or<std::string>(body, "out", "");
                const YoloExport result =
                    out.empty() ? build_yolo(snap->store, snap->project, *list)
                                : export_yolo(snap->store, snap->project, *list, resolve_under(snap->project.root_dir, out));
                json reply{{"skipped", skipped_json(result.skipped)}, {"file_count", result.files.size()}};
                if (out.empty()) reply["files"] = result.files;
                return reply;
              }));

  server.Post(P + "/export/coco", json_route([&s](const httplib::Request& req) {
                const json body = parse_body(req);
                const auto snap = s.project(req.matches[1])->current();
                const auto mode_name = field_or<std::string>(body, "mode", "polygon");
                if (mode_name != "polygon" && mode_name != "rle") {
                  throw Error(ErrorCode::InvalidArgument, "mode must be polygon or rle", mode_name);
                }
                const CocoMaskMode mode = mode_name == "rle" ? CocoMaskMode::Rle : CocoMaskMode::Polygon;
                std::optional<CategoryLists> lists;
                const CategoryList* list = nullptr;
                if (const auto name = field_or<std::string>(body, "categories", ""); !name.empty()) {
                  lists = s.category_lists();
                  list = lists->find(name);
                  if (list == nullptr) throw Error(ErrorCode::NotFound, "unknown category list '" + name + "'", name);
                }
                const auto out = field_or<std::string>(body, "out", "");
                const CocoExport result =
                    out.empty() ? build_coco(snap->store, snap->project, mode, list)
                                : export_coco(snap->store, snap->project, resolve_under(snap->project.root_dir, out),
                                              mode, list);
                json reply{{"skipped", skipped_json(result.skipped)}};
                if (out.empty()) reply["document"] = result.document;
                return reply;
              }));

  server.Post(F + "/grabcut", json_route([&s](const httplib::Request& req) {
                const json body = parse_body(req);
                const std::string pid = req.matches[1];
                const auto snap = s.project(pid)->current();
                const int idx = path_int(req, 2);
                Impl::check_frame(*snap, idx);
                const BoundingBox rect = wire::box_from_json(field<json>(body, "rect"));
                const int iterations = field_or<int>(body, "iterations", kDefaultGrabCutIterations);
                if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
                const RgbImage image = read_png_rgb(frame_image_path(snap->project, idx, "rgb"));
                GrabCutResult r = grabcut_init(image, rect, iterations);

                auto session = std::make_shared<Session>();
                session->project_id = pid;
                session->frame = idx;
                session->last_used = Clock::now();
                const std::string token = s.new_token();
                json reply = grabcut_json(token, idx, r);
                session->state = std::move(r.state);
                session->mask = std::move(r.mask);
                session->collapsed = r.collapsed;
                s.expire_sessions();
                std::lock_guard<std::mutex> guard(s.mutex);
                s.sessions.emplace(token, std::move(session));
                return reply;
              }));

  server.Post(R"(/api/grabcut/([0-9a-f]+)/refine)", json_route([&s](const httplib::Request& req) {
                const json body = parse_body(req);
                const std::string token = req.matches[1];
                auto session = s.session(token);
                std::vector<Brush> brushes;
                for (const auto& b : field<json>(body, "brushes")) brushes.push_back(wire::brush_from_json(b));
                const int iterations = field_or<int>(body, "iterations", kDefaultGrabCutIterations);
                if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
                std::lock_guard<std::mutex> guard(session->mutex);
                GrabCutResult r = grabcut_refine(session->state, brushes, iterations);
                json reply = grabcut_json(token, session->frame, r);
                session->state = std::move(r.state);
                session->mask = std::move(r.mask);
                session->collapsed = r.collapsed;
                session->last_used = Clock::now();
                return reply;
              }));

  server.Post(R"(/api/grabcut/([0-9a-f]+)/commit)", json_route([&s](const httplib::Request& req) {
                const json body = parse_body(req);
                const std::string token = req.matches[1];
                auto session = s.session(token);
                Mutation m;
                {
                  std::lock_guard<std::mutex> guard(session->mutex);
                  if (session->collapsed || popcount(session->mask) == 0) {
                    throw Error(ErrorCode::EmptyMask, "segmentation is empty; nothing to commit");
                  }
                  const auto snap = s.project(session->project_id)->current();
                  PixelMask mask(session->mask);
                  if (snap->project.dontcare_border_width > 0) {
                    mask = add_dontcare_border(std::move(mask), snap->project.dontcare_border_width);
                  }
                  const json geometry = wire::to_json(Geometry{std::move(mask)});
                  const auto& frame = snap->store.frames.at(session->frame);
                  const bool has_id = body.contains("id") && !body.at("id").is_null();
                  if (has_id && frame.find(ObjectId{field<std::int64_t>(body, "id")}) != nullptr) {
                    m = Mutation{"update_object",
                                 {{"frame", session->frame}, {"id", body.at("id")}, {"geometry", geometry}}};
                  } else {
                    json object{{"tag", field<std::string>(body, "tag")}, {"geometry", geometry}};
                    if (has_id) object["id"] = body.at("id");
                    if (body.contains("meta")) object["meta"] = body.at("meta");
                    m = Mutation{"create_object", {{"frame", session->frame}, {"object", std::move(object)}}};
                  }
                }
                json reply = s.mutate(session->project_id, m);
                std::lock_guard<std::mutex> guard(s.mutex);
                s.sessions.erase(token);
                return reply;
              }));

  server.Delete(R"(/api/grabcut/([0-9a-f]+))", json_route([&s](const httplib::Request& req) {
                  const std::string token = req.matches[1];
                  std::lock_guard<std::mutex> guard(s.mutex);
                  if (s.sessions.erase(token) == 0) throw Error(ErrorCode::NotFound, "unknown session", token);
                  return json{{"closed", token}};
                }));

  if (config_.log_requests) {
    server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
      log_event({{"level", res.status >= 500 ? "error" : "info"},
                 {"event", "request"},
                 {"method", req.method},
                 {"path", req.path},
                 {"status", res.status}});
    });
  }
}

int serve(const ServiceConfig& config) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  AnnotationService service(config);
  httplib::Server server;
  service.mount(server);

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });

  log_event({{"level", "info"},
             {"event", "listening"},
             {"host", config.host},
             {"port", config.port},
             {"projects_root", config.projects_root.string()}});
  const bool ok = server.listen(config.host, config.port);
  if (!ok) {
    log_event({{"level", "error"}, {"event", "listen_failed"}, {"host", config.host}, {"port", config.port}});
    pthread_kill(waiter.native_handle(), SIGTERM);
  }
  waiter.join();
  return ok ? 0 : 2;
}

}  // namespace annotweave
