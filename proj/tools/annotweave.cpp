// Headless batch front end: validation, exports, conversion, interpolation, backups and the HTTP server.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "annotweave/core/error.hpp"
#include "annotweave/core/validate.hpp"
#include "annotweave/exporters/categories.hpp"
#include "annotweave/exporters/exporters.hpp"
#include "annotweave/sequence/sequence.hpp"
#include "annotweave/service/server.hpp"
#include "annotweave/storage/project_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace annotweave;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoFailure:
    case ErrorCode::NotFound:
    case ErrorCode::Locked: return kExitIo;
    default: return kExitInvalid;
  }
}

struct Report {
  std::string command;
  json body = json::object();
  std::vector<std::string> warnings;
  std::vector<json> errors;

  [[nodiscard]] json to_json(int exit_code) const {
    json out = body;
    out["command"] = command;
    out["ok"] = exit_code == kExitOk;
    out["exit_code"] = exit_code;
    out["warnings"] = warnings;
    out["errors"] = errors;
    return out;
  }
};

fs::path executable_dir() {
  std::error_code ec;
  const fs::path exe = fs::read_symlink("/proc/self/exe", ec);
  return ec ? fs::current_path() : exe.parent_path();
}

fs::path default_category_dir() { return executable_dir() / "categoryLists"; }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string(), path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// A category list given either as a file path or as a list name in `dir`.
CategoryList resolve_categories(const std::string& name_or_path, const fs::path& dir, Report& report) {
  if (fs::is_regular_file(name_or_path)) return parse_category_list(fs::path(name_or_path).stem().string(), read_text(name_or_path));
  const CategoryLists lists = load_category_lists(dir);
  report.warnings.insert(report.warnings.end(), lists.warnings.begin(), lists.warnings.end());
  const CategoryList* list = lists.find(name_or_path);
  if (list == nullptr) {
    throw Error(ErrorCode::NotFound, "no category list '" + name_or_path + "' in " + dir.string(), name_or_path);
  }
  return *list;
}

json skipped_json(const std::vector<SkippedObject>& skipped) {
  json out = json::array();
  for (const auto& s : skipped) {
    out.push_back({{"frame", s.frame}, {"id", s.id.value}, {"tag", s.tag}, {"reason", s.reason}});
  }
  return out;
}

void append_warnings(Report& report, const LoadedProject& loaded) {
  report.warnings.insert(report.warnings.end(), loaded.warnings.begin(), loaded.warnings.end());
}

int run_validate(const fs::path& root, Report& report) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::IoFailure, "no project directory " + root.string());
  const LoadedProject loaded = load_project(root);
  append_warnings(report, loaded);
  for (const auto& f : loaded.missing_mask_images) {
    report.errors.push_back({{"frame", f}, {"code", "missing_mask_image"}, {"message", "mask image not found"}});
  }
  std::size_t objects = 0;
  for (const auto& frame : loaded.store.frames) {
    for (const auto& obj : frame.objects) {
      ++objects;
      for (const auto& v : validate_object(obj, loaded.project)) {
        report.errors.push_back({{"frame", frame.frame_index},
                                 {"file", frame.image_file},
                                 {"id", obj.id.value},
                                 {"code", v.code},
                                 {"message", v.message}});
      }
    }
  }
  report.body["frames"] = loaded.store.size();
  report.body["objects"] = objects;
  return report.errors.empty() ? kExitOk : kExitInvalid;
}

int run_export_yolo(const fs::path& root, const std::string& categories, const fs::path& category_dir,
                    const fs::path& out, Report& report) {
  const LoadedProject loaded = load_project(root);
  append_warnings(report, loaded);
  const CategoryList list = resolve_categories(categories, category_dir, report);
  const YoloExport result = export_yolo(loaded.store, loaded.project, list, out);
  report.body["files"] = result.files.size();
  report.body["out"] = out.string();
  report.body["skipped"] = skipped_json(result.skipped);
  return kExitOk;
}

int run_export_coco(const fs::path& root, const std::string& mode, const std::string& categories,
                    const fs::path& category_dir, const fs::path& out, Report& report) {
  const LoadedProject loaded = load_project(root);
  append_warnings(report, loaded);
  std::optional<CategoryList> list;
  if (!categories.empty()) list = resolve_categories(categories, category_dir, report);
  const CocoExport result = export_coco(loaded.store, loaded.project, out,
                                        mode == "rle" ? CocoMaskMode::Rle : CocoMaskMode::Polygon,
                                        list ? &*list : nullptr);
  report.body["annotations"] = result.document.at("annotations").size();
  report.body["out"] = out.string();
  report.body["skipped"] = skipped_json(result.skipped);
  return kExitOk;
}

std::string relative_to(const fs::path& target, const fs::path& base) {
  return fs::relative(fs::absolute(target), fs::absolute(base)).generic_string();
}

int run_convert(const fs::path& root, const fs::path& out_root, Report& report) {
  const LoadedProject loaded = load_project(root);
  append_warnings(report, loaded);
  std::error_code ec;
  fs::create_directories(out_root, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_root.string() + ": " + ec.message());
  if (fs::exists(out_root / kAnnotationsFile)) {
    throw Error(ErrorCode::IoFailure, out_root.string() + " already holds a project", out_root.string());
  }

  BoxConversion converted = convert_pixel_to_box(loaded.store, loaded.project);
  Project& p = converted.project;
  p.root_dir = out_root;
  // The converted project keeps reading frames from the source tree.
  p.modalities.rgb.dir = relative_to(root / loaded.project.modalities.rgb.dir, out_root);
  if (p.modalities.thermal) p.modalities.thermal->dir = relative_to(root / p.modalities.thermal->dir, out_root);
  if (!p.homography_file.empty()) p.homography_file = relative_to(root / p.homography_file, out_root);
  if (fs::exists(root / kDontCareMaskFile)) {
    fs::copy_file(root / kDontCareMaskFile, out_root / kDontCareMaskFile, fs::copy_options::overwrite_existing, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot copy don't-care mask: " + ec.message());
  }
  save_project(p, converted.store);
  report.body["out"] = out_root.string();
  report.body["dropped"] = skipped_json(converted.dropped);
  return kExitOk;
}

int run_interpolate(const fs::path& root, std::int64_t id, int from, int to, Report& report) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::IoFailure, "no project directory " + root.string());
  const ProjectLock lock(root);
  LoadedProject loaded = open_project(root);
  append_warnings(report, loaded);
  const AnnotationStore before = loaded.store;
  AnnotationStore after = interpolate(std::move(loaded.store), ObjectId{id}, from, to);
  json frames = json::array();
  for (int i = 0; i < after.size(); ++i) {
    if (!(after.frames[i] == before.frames[i])) frames.push_back(i);
  }
  save_project(loaded.project, after);
  report.body["id"] = id;
  report.body["frames_written"] = frames;
  return kExitOk;
}

int run_backup(const fs::path& root, Report& report) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::IoFailure, "no project directory " + root.string());
  const auto path = backup_annotations(root);
  if (!path) {
    report.warnings.push_back(std::string("no ") + kAnnotationsFile + " to back up");
    report.body["backup"] = nullptr;
  } else {
    report.body["backup"] = path->string();
  }
  return kExitOk;
}

void print_human(const Report& report, int code) {
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& e : report.errors) {
    std::string where;
    if (e.contains("file")) where = e.at("file").get<std::string>() + ": ";
    else if (e.contains("frame") && e.at("frame").is_string()) where = e.at("frame").get<std::string>() + ": ";
    if (e.contains("id")) where += "object " + std::to_string(e.at("id").get<std::int64_t>()) + ": ";
    std::cerr << "error: " << where << e.value("message", "") << " [" << e.value("code", "") << "]\n";
  }
  if (code != kExitOk) return;
  if (report.command == "validate") {
    std::cout << "ok: " << report.body.value("frames", 0) << " frames, " << report.body.value("objects", 0)
              << " objects\n";
  } else if (report.command == "backup") {
    if (!report.body.at("backup").is_null()) std::cout << report.body.at("backup").get<std::string>() << '\n';
  } else if (report.body.contains("out")) {
    std::cout << "wrote " << report.body.at("out").get<std::string>() << '\n';
  } else if (report.command == "interpolate") {
    std::cout << "wrote " << report.body.at("frames_written").size() << " frames\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"annotweave: image and video annotation tooling"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Print a machine-readable report on standard output");

  std::string root;
  std::string out;
  std::string categories;
  std::string category_dir = default_category_dir().string();
  std::string mode = "polygon";
  std::int64_t id = 0;
  int from = 0;
  int to = 0;

  auto* validate = app.add_subcommand("validate", "Check a project against the annotation rules");
  validate->add_option("root", root, "Project directory")->required();

  auto* yolo = app.add_subcommand("export-yolo", "Write YOLO label files");
  yolo->add_option("root", root, "Project directory")->required();
  yolo->add_option("--categories", categories, "Category list name or file")->required();
  yolo->add_option("--category-dir", category_dir, "Directory holding category lists");
  yolo->add_option("--out", out, "Output directory")->required();

  auto* coco = app.add_subcommand("export-coco", "Write a COCO annotation file");
  coco->add_option("root", root, "Project directory")->required();
  coco->add_option("--mode", mode, "Geometry encoding for boxes and polygons")
      ->check(CLI::IsMember({"polygon", "rle"}));
  coco->add_option("--categories", categories, "Category list name or file (default: tags in order of appearance)");
  coco->add_option("--category-dir", category_dir, "Directory holding category lists");
  coco->add_option("--out", out, "Output JSON file")->required();

  auto* convert = app.add_subcommand("convert-to-boxes", "Write a box project from a pixel project");
  convert->add_option("root", root, "Source project directory")->required();
  convert->add_option("--out", out, "Target project directory")->required();

  auto* interp = app.add_subcommand("interpolate", "Fill the frames between two keyframes of one track");
  interp->add_option("root", root, "Project directory")->required();
  interp->add_option("--id", id, "Object ID")->required();
  interp->add_option("--from", from, "Start keyframe index")->required();
  interp->add_option("--to", to, "End keyframe index")->required();

  auto* backup = app.add_subcommand("backup", "Copy annotations.csv into the backup directory");
  backup->add_option("root", root, "Project directory")->required();

  ServiceConfig service;
  std::string projects_root;
  bool quiet = false;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("--host", service.host, "Listen address");
  serve_cmd->add_option("--port", service.port, "Listen port (default: $PORT or 8080)");
  serve_cmd->add_option("--projects-root", projects_root, "Directory projects are opened from (default: $PROJECTS_ROOT or .)");
  serve_cmd->add_option("--category-dir", category_dir, "Directory holding category lists");
  serve_cmd->add_flag("--quiet", quiet, "Do not log every request");

  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.starts_with("-")) continue;
    if (app.get_subcommand_no_throw(arg) == nullptr) {
      std::cerr << "error: unknown subcommand '" << arg << "'\n\n" << app.help();
      return kExitIo;
    }
    break;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << "error: " << e.what() << "\n\n" << sub->help();
    return kExitIo;
  }

  Report report;
  int code = kExitOk;
  try {
    if (validate->parsed()) {
      report.command = "validate";
      code = run_validate(root, report);
    } else if (yolo->parsed()) {
      report.command = "export-yolo";
      code = run_export_yolo(root, categories, category_dir, out, report);
    } else if (coco->parsed()) {
      report.command = "export-coco";
      code = run_export_coco(root, mode, categories, category_dir, out, report);
    } else if (convert->parsed()) {
      report.command = "convert-to-boxes";
      code = run_convert(root, out, report);
    } else if (interp->parsed()) {
      report.command = "interpolate";
      code = run_interpolate(root, id, from, to, report);
    } else if (backup->parsed()) {
      report.command = "backup";
      code = run_backup(root, report);
    } else if (serve_cmd->parsed()) {
      // Flags win over the environment, which wins over the defaults.
      const bool port_flag = serve_cmd->count("--port") > 0;
      const int flag_port = service.port;
      service = config_from_environment(service);
      if (port_flag) service.port = flag_port;
      if (!projects_root.empty()) service.projects_root = projects_root;
      service.category_dir = category_dir;
      service.log_requests = !quiet;
      return serve(service);
    }
  } catch (const Error& e) {
    code = exit_code_for(e.code());
    report.errors.push_back({{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"details", e.details()}});
  } catch (const std::exception& e) {
    code = kExitIo;
    report.errors.push_back({{"code", "Internal"}, {"message", e.what()}, {"details", ""}});
  }

  if (as_json) {
    std::cout << report.to_json(code).dump(2) << '\n';
  } else {
    print_human(report, code);
  }
  return code;
}
