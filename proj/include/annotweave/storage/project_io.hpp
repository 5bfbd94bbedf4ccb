#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "annotweave/core/model.hpp"

namespace annotweave {

inline constexpr const char* kAnnotationsFile = "annotations.csv";
inline constexpr const char* kSettingsFile = "annotweave.json";
inline constexpr const char* kSuggestedTagsFile = "suggested_tags.txt";
inline constexpr const char* kMetaFieldsFile = "meta_fields.txt";
inline constexpr const char* kDontCareMaskFile = "mask.png";
inline constexpr const char* kBackupDir = "backup";
inline constexpr const char* kLockFile = ".annotweave.lock";

struct LoadedProject {
  Project project;
  AnnotationStore store;
  std::vector<std::string> warnings;
  /// Frames whose referenced mask image is absent; their mask objects are dropped.
  std::vector<std::string> missing_mask_images;
};

struct LoadOptions {
  /// Geometry for fresh projects without annotations.csv or settings.
  GeometryKind default_geometry = GeometryKind::Box;
};

/// Reads settings, sidecars, annotations.csv, ID mask images and the don't-care mask
/// (root/mask.png before ../mask.png). Throws Error(CorruptCsv) with "line N column M" details.
[[nodiscard]] LoadedProject load_project(const std::filesystem::path& root, const LoadOptions& options = {});

/// backup_annotations followed by load_project.
[[nodiscard]] LoadedProject open_project(const std::filesystem::path& root, const LoadOptions& options = {});

/// Writes annotations.csv, ID mask images (pixel projects), settings and sidecars; each file atomically.
void save_project(const Project& project, const AnnotationStore& store);

/// The CSV text save_project would write.
[[nodiscard]] std::string format_annotations_csv(const Project& project, const AnnotationStore& store);

[[nodiscard]] std::string mask_file_name(const std::string& frame_file);

/// True for the don't-care mask and ID mask images, which are never frames.
[[nodiscard]] bool is_mask_artifact(const std::string& file_name);

/// Copies annotations.csv to backup/annotations_<YYYYMMDD-HHMMSS>[-N].csv; returns nullopt without a CSV.
std::optional<std::filesystem::path> backup_annotations(
    const std::filesystem::path& root,
    std::chrono::system_clock::time_point now = std::chrono::system_clock::now());

/// Suggested list = user list followed by tags already used in the store (first appearance order).
[[nodiscard]] std::vector<std::string> tag_suggestions(const Project& project, const AnnotationStore& store);

/// Replaces the user tag list without touching disk. Throws Error(DuplicateName) / Error(InvalidArgument).
[[nodiscard]] Project replace_suggested_tags(Project project, std::vector<std::string> tags);
/// replace_suggested_tags followed by writing the sidecar.
[[nodiscard]] Project edit_suggested_tags(Project project, std::vector<std::string> tags);

struct SchemaEdit {
  Project project;
  AnnotationStore store;
};

/// Replaces the meta schema in memory; added fields default to false on every object.
/// Removing a field some object has set requires `confirm_removal`, else Error(FieldInUse).
[[nodiscard]] SchemaEdit replace_meta_schema(Project project, AnnotationStore store, std::vector<std::string> names,
                                             bool confirm_removal = false);
/// replace_meta_schema followed by writing the sidecar.
[[nodiscard]] SchemaEdit edit_meta_schema(Project project, AnnotationStore store, std::vector<std::string> names,
                                          bool confirm_removal = false);

/// Meta fields that edit_meta_schema would drop while some object still has them set.
[[nodiscard]] std::vector<std::string> fields_in_use(const AnnotationStore& store,
                                                     const std::vector<std::string>& removed);

/// Writes `content` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Advisory single-writer lock on a project root, released on destruction.
class ProjectLock {
 public:
  /// Throws Error(Locked) when another live process holds the lock.
  explicit ProjectLock(const std::filesystem::path& root);
  ~ProjectLock();
  ProjectLock(const ProjectLock&) = delete;
  ProjectLock& operator=(const ProjectLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace annotweave
