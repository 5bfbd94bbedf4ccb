#include "annotweave/core/validate.hpp"

#include <algorithm>
#include <set>

#include "annotweave/core/error.hpp"

namespace annotweave {
namespace {

void check_id(const AnnotatedObject& obj, const Project& project, std::vector<Violation>& out) {
  const auto v = obj.id.value;
  if (v < 0) {
    out.push_back({"negative_id", "object IDs are non-negative"});
    return;
  }
  if (project.geometry_kind != GeometryKind::Pixel) return;
  if (v == kDontCareValue) {
    out.push_back({"reserved_dontcare_id", "ID 170 is the reserved don't-care ID"});
  } else if (v <= kMaxReservedId) {
    out.push_back({"reserved_internal_id", "IDs 0-10 reserved for internal use"});
  } else if (v > kMaxPixelId) {
    out.push_back({"id_out_of_range", "pixel-project IDs must fit in one gray level (<= 255)"});
  }
}

void check_geometry(const AnnotatedObject& obj, const Project& project, std::vector<Violation>& out) {
  const bool box_project = project.geometry_kind == GeometryKind::Box;
  if (const auto* box = std::get_if<BoundingBox>(&obj.geometry)) {
    if (!box_project) out.push_back({"geometry_kind", "box geometry in a pixel project"});
    if (box->ul_x >= box->lr_x || box->ul_y >= box->lr_y) {
      out.push_back({"degenerate_box", "box needs ul_x < lr_x and ul_y < lr_y"});
    } else if (project.image_size) {
      const BoundingBox image{0, 0, project.image_size->width, project.image_size->height};
      if (intersect(*box, image).empty()) out.push_back({"box_outside_image", "box does not intersect the image"});
    }
  } else if (const auto* poly = std::get_if<Polygon>(&obj.geometry)) {
    if (box_project) out.push_back({"geometry_kind", "polygon geometry in a box project"});
    if (poly->points.size() < 3) out.push_back({"polygon_too_short", "polygons need at least 3 points"});
    for (std::size_t i = 1; i < poly->points.size(); ++i) {
      if (poly->points[i] == poly->points[i - 1]) {
        out.push_back({"polygon_duplicate_point", "consecutive duplicate polygon points"});
        break;
      }
    }
  } else {
    const auto& mask = std::get<PixelMask>(obj.geometry);
    if (box_project) out.push_back({"geometry_kind", "pixel mask in a box project"});
    if (!same_shape(mask.object, mask.dontcare)) {
      out.push_back({"mask_shape", "object and don't-care rasters differ in size"});
    } else if (((mask.object != 0) && (mask.dontcare != 0)).any()) {
      out.push_back({"mask_overlap", "object and don't-care bits overlap"});
    }
    if (project.image_size &&
        (mask.width() != project.image_size->width || mask.height() != project.image_size->height)) {
      out.push_back({"mask_size", "mask size differs from the master image"});
    }
  }
}

}  // namespace

std::vector<Violation> validate_object(const AnnotatedObject& obj, const Project& project) {
  std::vector<Violation> out;
  check_id(obj, project, out);

  if (obj.tag.empty()) {
    out.push_back({"empty_tag", "tag must be non-empty"});
  } else if (project.limit_tags &&
             std::find(project.suggested_tags.begin(), project.suggested_tags.end(), obj.tag) ==
                 project.suggested_tags.end()) {
    out.push_back({"tag_not_suggested", "tag '" + obj.tag + "' is not in the suggested list"});
  }

  for (const auto& name : project.meta_schema.names) {
    if (!obj.meta.contains(name)) out.push_back({"meta_missing", "meta field '" + name + "' missing"});
  }
  for (const auto& [name, _] : obj.meta) {
    if (!project.meta_schema.contains(name)) out.push_back({"meta_unknown", "meta field '" + name + "' not in schema"});
  }

  check_geometry(obj, project, out);
  return out;
}

ObjectId next_free_id(const Project& project, const AnnotationStore& store) {
  std::set<std::int64_t> used;
  for (const auto& frame : store.frames) {
    for (const auto& obj : frame.objects) used.insert(obj.id.value);
  }
  if (project.geometry_kind == GeometryKind::Pixel) {
    for (std::int64_t v = kMaxReservedId + 1; v <= kMaxPixelId; ++v) {
      if (is_legal_pixel_id(v) && !used.contains(v)) return ObjectId{v};
    }
    throw Error(ErrorCode::IdSpaceExhausted, "all 244 pixel-project IDs are in use");
  }
  std::int64_t v = 0;
  for (auto u : used) {
    if (u < v) continue;
    if (u != v) break;
    ++v;
  }
  return ObjectId{v};
}

}  // namespace annotweave
