#include "annotweave/storage/project_io.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "annotweave/core/error.hpp"
#include "annotweave/mask/id_codec.hpp"
#include "annotweave/storage/csv.hpp"
#include "annotweave/storage/frames.hpp"
#include "annotweave/storage/png_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace annotweave {
namespace {

const std::vector<std::string> kBoxColumns = {"frame", "id", "tag", "ul_x", "ul_y", "lr_x", "lr_y", "status"};
const std::vector<std::string> kPixelColumns = {"frame", "mask_file", "id", "tag", "status", "polygon"};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> out;
  if (!fs::exists(path)) return out;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t");
    out.push_back(line.substr(b, e - b + 1));
  }
  return out;
}

std::string lines_text(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + '\n';
  return out;
}

[[noreturn]] void corrupt(int line, int column, const std::string& what) {
  const std::string where = "line " + std::to_string(line) + " column " + std::to_string(column);
  throw Error(ErrorCode::CorruptCsv, "annotations.csv " + where + ": " + what, where);
}

template <typename T>
T parse_number(const std::string& s, int line, int column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) corrupt(line, column, "not a number: '" + s + "'");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_polygon(const Polygon& p) {
  std::string out;
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(p.points[i].x()) + ',' + format_double(p.points[i].y());
  }
  return out;
}

Polygon parse_polygon(const std::string& text, int line, int column) {
  Polygon p;
  std::istringstream in(text);
  std::string pair;
  while (in >> pair) {
    const auto comma = pair.find(',');
    if (comma == std::string::npos) corrupt(line, column, "polygon vertex without comma: '" + pair + "'");
    p.points.emplace_back(parse_number<double>(pair.substr(0, comma), line, column),
                          parse_number<double>(pair.substr(comma + 1), line, column));
  }
  return p;
}

ObjectStatus parse_status(const std::string& s, int line, int column) {
  if (s == "active") return ObjectStatus::Active;
  if (s == "lastframe") return ObjectStatus::LastFrameReached;
  corrupt(line, column, "unknown status '" + s + "'");
}

bool parse_flag(const std::string& s, int line, int column) {
  if (s == "0") return false;
  if (s == "1") return true;
  corrupt(line, column, "meta flag must be 0 or 1, got '" + s + "'");
}

}  // namespace

bool is_mask_artifact(const std::string& name) {
  return name == kDontCareMaskFile ||
         (name.size() > 9 && name.compare(name.size() - 9, 9, "_mask.png") == 0);
}

namespace {

struct Settings {
  GeometryKind geometry = GeometryKind::Box;
  bool geometry_given = false;
  Modalities modalities;
  std::string homography_file;
  bool limit_tags = false;
  int border_width = 0;
  std::optional<ImageSize> image_size;
};

Settings read_settings(const fs::path& root) {
  Settings s;
  const fs::path path = root / kSettingsFile;
  if (!fs::exists(path)) return s;
  try {
    const json j = json::parse(read_text(path));
    if (j.contains("geometry")) {
      s.geometry = j.at("geometry").get<std::string>() == "pixel" ? GeometryKind::Pixel : GeometryKind::Box;
      s.geometry_given = true;
    }
    s.modalities.rgb.dir = j.value("rgb_dir", std::string("."));
    s.modalities.rgb.pattern = j.value("frame_pattern", std::string("*.png"));
    if (j.contains("thermal") && !j.at("thermal").is_null()) {
      s.modalities.thermal = Modality{j.at("thermal").value("dir", std::string()),
                                      j.at("thermal").value("pattern", std::string("*.png"))};
    }
    s.homography_file = j.value("homography_file", std::string());
    s.limit_tags = j.value("limit_tags", false);
    s.border_width = j.value("dontcare_border_width", 0);
    if (j.contains("image_width") && j.contains("image_height")) {
      s.image_size = ImageSize{j.at("image_width").get<int>(), j.at("image_height").get<int>()};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoFailure, std::string("malformed ") + kSettingsFile + ": " + e.what());
  }
  return s;
}

std::string format_settings(const Project& p) {
  json j;
  j["geometry"] = to_string(p.geometry_kind);
  j["rgb_dir"] = p.modalities.rgb.dir;
  j["frame_pattern"] = p.modalities.rgb.pattern;
  if (p.modalities.thermal) {
    j["thermal"] = {{"dir", p.modalities.thermal->dir}, {"pattern", p.modalities.thermal->pattern}};
  } else {
    j["thermal"] = nullptr;
  }
  j["homography_file"] = p.homography_file;
  j["limit_tags"] = p.limit_tags;
  j["dontcare_border_width"] = p.dontcare_border_width;
  if (p.image_size) {
    j["image_width"] = p.image_size->width;
    j["image_height"] = p.image_size->height;
  }
  return j.dump(2) + '\n';
}

struct Row {
  int line = 0;
  std::string frame;
  std::string mask_file;
  AnnotatedObject object;
  bool is_mask = false;
};

struct ParsedCsv {
  GeometryKind geometry = GeometryKind::Box;
  std::vector<std::string> meta_columns;
  std::vector<Row> rows;
};

ParsedCsv parse_csv(const std::string& text) {
  ParsedCsv out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  std::size_t fixed = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = csv::split(line, line_no);
    if (header.empty()) {
      header = std::move(fields);
      auto starts_with = [&](const std::vector<std::string>& cols) {
        return header.size() >= cols.size() && std::equal(cols.begin(), cols.end(), header.begin());
      };
      if (starts_with(kPixelColumns)) {
        out.geometry = GeometryKind::Pixel;
        fixed = kPixelColumns.size();
      } else if (starts_with(kBoxColumns)) {
        out.geometry = GeometryKind::Box;
        fixed = kBoxColumns.size();
      } else {
        corrupt(line_no, 1, "unrecognised header");
      }
      out.meta_columns.assign(header.begin() + static_cast<std::ptrdiff_t>(fixed), header.end());
      std::set<std::string> seen;
      for (const auto& m : out.meta_columns) {
        if (m.empty() || !seen.insert(m).second) corrupt(line_no, 1, "empty or duplicate meta column '" + m + "'");
      }
      continue;
    }
    if (fields.size() != header.size()) {
      corrupt(line_no, static_cast<int>(std::min(fields.size(), header.size())) + 1,
              "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    Row row;
    row.line = line_no;
    row.frame = fields[0];
    if (row.frame.empty()) corrupt(line_no, 1, "empty frame name");
    auto& obj = row.object;
    if (out.geometry == GeometryKind::Box) {
      obj.id = ObjectId{parse_number<std::int64_t>(fields[1], line_no, 2)};
      obj.tag = fields[2];
      BoundingBox b;
      b.ul_x = parse_number<int>(fields[3], line_no, 4);
      b.ul_y = parse_number<int>(fields[4], line_no, 5);
      b.lr_x = parse_number<int>(fields[5], line_no, 6) + 1;  // stored inclusive
      b.lr_y = parse_number<int>(fields[6], line_no, 7) + 1;
      obj.geometry = b;
      obj.status = parse_status(fields[7], line_no, 8);
    } else {
      row.mask_file = fields[1];
      obj.id = ObjectId{parse_number<std::int64_t>(fields[2], line_no, 3)};
      obj.tag = fields[3];
      obj.status = parse_status(fields[4], line_no, 5);
      if (!fields[5].empty()) {
        obj.geometry = parse_polygon(fields[5], line_no, 6);
      } else if (!row.mask_file.empty()) {
        row.is_mask = true;
        obj.geometry = PixelMask();
      } else {
        corrupt(line_no, 2, "pixel row needs a mask file or a polygon");
      }
    }
    for (std::size_t m = 0; m < out.meta_columns.size(); ++m) {
      obj.meta[out.meta_columns[m]] = parse_flag(fields[fixed + m], line_no, static_cast<int>(fixed + m + 1));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::optional<Bitmask> load_dontcare_mask(const fs::path& root) {
  for (const fs::path& candidate : {root / kDontCareMaskFile, root.parent_path() / kDontCareMaskFile}) {
    if (fs::exists(candidate)) return (read_png_gray(candidate) != 0).cast<std::uint8_t>();
  }
  return std::nullopt;
}

}  // namespace

std::string mask_file_name(const std::string& frame_file) {
  return fs::path(frame_file).stem().string() + "_mask.png";
}

LoadedProject load_project(const fs::path& root_in, const LoadOptions& options) {
  if (!fs::is_directory(root_in)) throw Error(ErrorCode::IoFailure, "project root does not exist: " + root_in.string());
  const fs::path root = fs::absolute(root_in).lexically_normal();
  LoadedProject out;
  Project& p = out.project;
  p.root_dir = root;

  const Settings settings = read_settings(root);
  p.modalities = settings.modalities;
  p.homography_file = settings.homography_file;
  p.limit_tags = settings.limit_tags;
  p.dontcare_border_width = settings.border_width;
  p.image_size = settings.image_size;
  p.meta_schema.names = read_lines(root / kMetaFieldsFile);
  p.suggested_tags = read_lines(root / kSuggestedTagsFile);

  ParsedCsv parsed;
  const fs::path csv_path = root / kAnnotationsFile;
  const bool has_csv = fs::exists(csv_path);
  if (has_csv) parsed = parse_csv(read_text(csv_path));
  p.geometry_kind = settings.geometry_given ? settings.geometry
                    : has_csv               ? parsed.geometry
                                            : options.default_geometry;
  if (has_csv && parsed.geometry != p.geometry_kind) {
    throw Error(ErrorCode::CorruptCsv, "annotations.csv layout does not match the project geometry", "line 1 column 1");
  }
  for (const auto& m : parsed.meta_columns) {
    if (!p.meta_schema.contains(m)) {
      p.meta_schema.names.push_back(m);
      out.warnings.push_back("meta field '" + m + "' found in annotations.csv but not in " + kMetaFieldsFile);
    }
  }

  const fs::path frame_dir = root / p.modalities.rgb.dir;
  std::vector<std::string> frames;
  if (fs::is_directory(frame_dir)) {
    FrameScan scan = scan_frames(frame_dir, p.modalities.rgb.pattern);
    for (auto& f : scan.files) {
      if (!is_mask_artifact(f)) frames.push_back(std::move(f));
    }
    if (frames.empty()) out.warnings.push_back("NoMatches: no frame files match '" + p.modalities.rgb.pattern + "'");
  }
  std::set<std::string> known(frames.begin(), frames.end());
  for (const auto& row : parsed.rows) {
    if (known.insert(row.frame).second) {
      frames.push_back(row.frame);
      out.warnings.push_back("frame '" + row.frame + "' referenced by annotations.csv has no image file");
    }
  }
  natural_sort(frames);
  p.frame_files = std::move(frames);

  if (!p.image_size && !p.frame_files.empty() && fs::exists(frame_dir / p.frame_files.front())) {
    try {
      p.image_size = read_png_size(frame_dir / p.frame_files.front());
    } catch (const Error&) {
      out.warnings.push_back("cannot read image size from " + p.frame_files.front());
    }
  }

  out.store = make_store(p);
  std::map<int, std::vector<const Row*>> mask_rows;
  for (const auto& row : parsed.rows) {
    const int idx = p.frame_index_of(row.frame);
    auto& frame = out.store.frames[idx];
    if (frame.find(row.object.id) != nullptr) corrupt(row.line, 1, "duplicate object ID in one frame");
    AnnotatedObject obj = row.object;
    for (const auto& name : p.meta_schema.names) obj.meta.try_emplace(name, false);
    frame.objects.push_back(std::move(obj));
    if (row.is_mask) mask_rows[idx].push_back(&row);
  }

  for (const auto& [idx, rows] : mask_rows) {
    auto& frame = out.store.frames[idx];
    const std::string& file = rows.front()->mask_file;
    for (const Row* r : rows) {
      if (r->mask_file != file) corrupt(r->line, 2, "frame uses more than one mask file");
    }
    const fs::path mask_path = root / file;
    if (!fs::exists(mask_path)) {
      out.missing_mask_images.push_back(file);
      out.warnings.push_back("MissingMaskImage: " + file);
      for (const Row* r : rows) frame.erase(r->object.id);
      continue;
    }
    const GrayImage raster = read_png_gray(mask_path);
    const int w = static_cast<int>(raster.cols()), h = static_cast<int>(raster.rows());
    if (!p.image_size) p.image_size = ImageSize{w, h};
    DecodedIdImage decoded = decode_id_image(raster);
    for (auto& wmsg : decoded.warnings) out.warnings.push_back(file + ": " + wmsg);

    Bitmask band = (raster == static_cast<std::uint8_t>(kDontCareValue)).cast<std::uint8_t>();
    for (auto& obj : frame.objects) {
      if (!std::holds_alternative<PixelMask>(obj.geometry)) continue;
      PixelMask mask(w, h);
      for (const auto& d : decoded.objects) {
        if (d.id == obj.id) mask.object = d.mask.object;
      }
      obj.geometry = std::move(mask);
    }
    for (const auto& d : decoded.objects) {
      if (frame.find(d.id) == nullptr) {
        out.warnings.push_back(file + ": gray value " + std::to_string(d.id.value) + " has no annotations.csv row");
      }
    }
    if ((band != 0).any()) {
      if (rows.size() == 1) {
        std::get<PixelMask>(frame.find(rows.front()->object.id)->geometry).dontcare = std::move(band);
      } else {
        frame.shared_dontcare = std::move(band);
      }
    }
  }

  p.dontcare_mask = load_dontcare_mask(root);
  return out;
}

LoadedProject open_project(const fs::path& root, const LoadOptions& options) {
  backup_annotations(root);
  return load_project(root, options);
}

std::string format_annotations_csv(const Project& project, const AnnotationStore& store) {
  const bool pixel = project.geometry_kind == GeometryKind::Pixel;
  std::vector<std::string> header = pixel ? kPixelColumns : kBoxColumns;
  header.insert(header.end(), project.meta_schema.names.begin(), project.meta_schema.names.end());
  std::string out = csv::join(header) + '\n';

  for (const auto& frame : store.frames) {
    for (const auto& obj : frame.objects) {
      std::vector<std::string> f;
      f.push_back(frame.image_file);
      if (!pixel) {
        const auto* b = std::get_if<BoundingBox>(&obj.geometry);
        if (b == nullptr) throw Error(ErrorCode::InvalidArgument, "box project holds a non-box geometry");
        f.push_back(std::to_string(obj.id.value));
        f.push_back(obj.tag);
        f.push_back(std::to_string(b->ul_x));
        f.push_back(std::to_string(b->ul_y));
        f.push_back(std::to_string(b->lr_x - 1));
        f.push_back(std::to_string(b->lr_y - 1));
        f.push_back(to_string(obj.status));
      } else {
        const auto* poly = std::get_if<Polygon>(&obj.geometry);
        if (poly == nullptr && !std::holds_alternative<PixelMask>(obj.geometry)) {
          throw Error(ErrorCode::InvalidArgument, "pixel project holds a box geometry");
        }
        f.push_back(poly ? std::string() : mask_file_name(frame.image_file));
        f.push_back(std::to_string(obj.id.value));
        f.push_back(obj.tag);
        f.push_back(to_string(obj.status));
        f.push_back(poly ? format_polygon(*poly) : std::string());
      }
      for (const auto& name : project.meta_schema.names) {
        const auto it = obj.meta.find(name);
        f.push_back(it != obj.meta.end() && it->second ? "1" : "0");
      }
      out += csv::join(f) + '\n';
    }
  }
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorCode::IoFailure, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot replace " + path.string() + ": " + ec.message());
}

void save_project(const Project& project, const AnnotationStore& store) {
  const fs::path& root = project.root_dir;
  if (!fs::is_directory(root)) throw Error(ErrorCode::IoFailure, "project root does not exist: " + root.string());
  if (store.frames.size() != project.frame_files.size()) {
    throw Error(ErrorCode::InvalidArgument, "store and project frame lists differ");
  }
  const std::string csv_text = format_annotations_csv(project, store);

  if (project.geometry_kind == GeometryKind::Pixel) {
    for (const auto& frame : store.frames) {
      std::vector<IdMask> masks;
      for (const auto& obj : frame.objects) {
        if (const auto* m = std::get_if<PixelMask>(&obj.geometry)) masks.push_back({obj.id, *m});
      }
      if (masks.empty()) {
        std::error_code ec;
        fs::remove(root / mask_file_name(frame.image_file), ec);
        continue;
      }
      const int w = masks.front().mask.width(), h = masks.front().mask.height();
      const GrayImage raster =
          encode_id_image(masks, w, h, frame.shared_dontcare ? &*frame.shared_dontcare : nullptr);
      const fs::path path = root / mask_file_name(frame.image_file);
      const fs::path tmp = path.string() + ".tmp.png";
      write_png_gray(tmp, raster);
      std::error_code ec;
      fs::rename(tmp, path, ec);
      if (ec) throw Error(ErrorCode::IoFailure, "cannot replace " + path.string() + ": " + ec.message());
    }
  }

  write_file_atomic(root / kSettingsFile, format_settings(project));
  write_file_atomic(root / kMetaFieldsFile, lines_text(project.meta_schema.names));
  write_file_atomic(root / kSuggestedTagsFile, lines_text(project.suggested_tags));
  write_file_atomic(root / kAnnotationsFile, csv_text);
}

std::optional<fs::path> backup_annotations(const fs::path& root, std::chrono::system_clock::time_point now) {
  const fs::path csv_path = root / kAnnotationsFile;
  if (!fs::exists(csv_path)) return std::nullopt;
  const fs::path dir = root / kBackupDir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());

  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  localtime_r(&t, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);

  fs::path target = dir / ("annotations_" + std::string(stamp) + ".csv");
  for (int n = 2; fs::exists(target); ++n) {
    target = dir / ("annotations_" + std::string(stamp) + "-" + std::to_string(n) + ".csv");
  }
  fs::copy_file(csv_path, target, fs::copy_options::none, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "backup failed: " + ec.message());
  return target;
}

std::vector<std::string> tag_suggestions(const Project& project, const AnnotationStore& store) {
  std::vector<std::string> out = project.suggested_tags;
  std::set<std::string> seen(out.begin(), out.end());
  for (const auto& frame : store.frames) {
    for (const auto& obj : frame.objects) {
      if (!obj.tag.empty() && seen.insert(obj.tag).second) out.push_back(obj.tag);
    }
  }
  return out;
}

namespace {

void check_names(const std::vector<std::string>& names, const char* what) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty() || n.find_first_of("\r\n") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, std::string(what) + " names must be non-empty single-line strings");
    }
    if (!seen.insert(n).second) throw Error(ErrorCode::DuplicateName, std::string("duplicate ") + what + " '" + n + "'", n);
  }
}

}  // namespace

Project replace_suggested_tags(Project project, std::vector<std::string> tags) {
  check_names(tags, "tag");
  project.suggested_tags = std::move(tags);
  return project;
}

Project edit_suggested_tags(Project project, std::vector<std::string> tags) {
  project = replace_suggested_tags(std::move(project), std::move(tags));
  write_file_atomic(project.root_dir / kSuggestedTagsFile, lines_text(project.suggested_tags));
  return project;
}

std::vector<std::string> fields_in_use(const AnnotationStore& store, const std::vector<std::string>& removed) {
  std::vector<std::string> out;
  for (const auto& name : removed) {
    bool used = false;
    for (const auto& frame : store.frames) {
      for (const auto& obj : frame.objects) {
        const auto it = obj.meta.find(name);
        used = used || (it != obj.meta.end() && it->second);
      }
    }
    if (used) out.push_back(name);
  }
  return out;
}

SchemaEdit replace_meta_schema(Project project, AnnotationStore store, std::vector<std::string> names,
                               bool confirm_removal) {
  check_names(names, "meta field");
  for (const auto& n : names) {
    const bool reserved = std::find(kBoxColumns.begin(), kBoxColumns.end(), n) != kBoxColumns.end() ||
                          std::find(kPixelColumns.begin(), kPixelColumns.end(), n) != kPixelColumns.end();
    if (reserved) throw Error(ErrorCode::InvalidArgument, "meta field '" + n + "' collides with a CSV column");
  }
  std::vector<std::string> removed;
  for (const auto& old : project.meta_schema.names) {
    if (std::find(names.begin(), names.end(), old) == names.end()) removed.push_back(old);
  }
  const auto busy = fields_in_use(store, removed);
  if (!busy.empty() && !confirm_removal) {
    std::string list;
    for (const auto& b : busy) list += (list.empty() ? "" : ",") + b;
    throw Error(ErrorCode::FieldInUse, "meta fields still set on objects: " + list, list);
  }
  for (auto& frame : store.frames) {
    for (auto& obj : frame.objects) {
      for (const auto& r : removed) obj.meta.erase(r);
      for (const auto& n : names) obj.meta.try_emplace(n, false);
    }
  }
  project.meta_schema.names = std::move(names);
  return {std::move(project), std::move(store)};
}

SchemaEdit edit_meta_schema(Project project, AnnotationStore store, std::vector<std::string> names,
                            bool confirm_removal) {
  auto edit = replace_meta_schema(std::move(project), std::move(store), std::move(names), confirm_removal);
  write_file_atomic(edit.project.root_dir / kMetaFieldsFile, lines_text(edit.project.meta_schema.names));
  return edit;
}

ProjectLock::ProjectLock(const fs::path& root) : path_(root / kLockFile) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      const std::string pid = std::to_string(::getpid()) + '\n';
      [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
      ::close(fd);
      return;
    }
    // Reclaim the lock when its owner no longer exists.
    long owner = 0;
    {
      std::ifstream in(path_);
      in >> owner;
    }
    if (owner > 0 && (::kill(static_cast<pid_t>(owner), 0) == 0 || errno == EPERM)) break;
    std::error_code ec;
    fs::remove(path_, ec);
  }
  throw Error(ErrorCode::Locked, "project " + root.string() + " is locked by another writer", path_.string());
}

ProjectLock::~ProjectLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

}  // namespace annotweave
