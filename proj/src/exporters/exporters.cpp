#include "annotweave/exporters/exporters.hpp"

#include <cstdio>
#include <fstream>

#include "annotweave/core/error.hpp"
#include "annotweave/mask/filters.hpp"
#include "annotweave/mask/polygon_raster.hpp"
#include "annotweave/storage/png_io.hpp"
#include "annotweave/storage/project_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace annotweave {
namespace {

Bitmask box_raster(const BoundingBox& b, ImageSize size) {
  Bitmask m = empty_mask(size.width, size.height);
  const BoundingBox c = intersect(b, BoundingBox{0, 0, size.width, size.height});
  if (!c.empty()) m.block(c.ul_y, c.ul_x, c.height(), c.width()).setOnes();
  return m;
}

/// Tight box of any geometry as seen on the image; nullopt when nothing is visible.
std::optional<BoundingBox> visible_box(const Geometry& g, ImageSize size) {
  const BoundingBox image{0, 0, size.width, size.height};
  if (const auto* b = std::get_if<BoundingBox>(&g)) {
    const BoundingBox c = intersect(*b, image);
    return c.empty() ? std::nullopt : std::optional(c);
  }
  Bitmask bits;
  if (const auto* p = std::get_if<Polygon>(&g)) bits = rasterize_polygon(*p, size.width, size.height).bits;
  else bits = std::get<PixelMask>(g).object;
  if ((bits == 0).all()) return std::nullopt;
  return mask_to_bbox(bits);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

}  // namespace

ImageSize frame_image_size(const Project& project, const FrameAnnotations& frame) {
  if (project.image_size) return *project.image_size;
  for (const auto& obj : frame.objects) {
    if (const auto* m = std::get_if<PixelMask>(&obj.geometry)) return {m->width(), m->height()};
  }
  const fs::path image = project.root_dir / project.modalities.rgb.dir / frame.image_file;
  if (fs::exists(image)) return read_png_size(image);
  throw Error(ErrorCode::InvalidArgument, "image size of frame '" + frame.image_file + "' is unknown");
}

std::string format_yolo_line(int category, const BoundingBox& box, ImageSize image) {
  const BoundingBox c = intersect(box, BoundingBox{0, 0, image.width, image.height});
  const double w = image.width, h = image.height;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f\n", category, (c.ul_x + c.lr_x) / 2.0 / w,
                (c.ul_y + c.lr_y) / 2.0 / h, c.width() / w, c.height() / h);
  return buf;
}

YoloExport build_yolo(const AnnotationStore& store, const Project& project, const CategoryList& categories) {
  if (categories.entries.empty()) {
    throw Error(ErrorCode::EmptyCategoryList, "category list '" + categories.name + "' is empty");
  }
  YoloExport out;
  for (const auto& frame : store.frames) {
    std::string text;
    if (!frame.objects.empty()) {
      const ImageSize size = frame_image_size(project, frame);
      for (const auto& obj : frame.objects) {
        const auto category = categories.index_of(obj.tag);
        if (!category) {
          out.skipped.push_back({frame.frame_index, obj.id, obj.tag, "tag not in category list"});
          continue;
        }
        const auto box = visible_box(obj.geometry, size);
        if (!box) {
          out.skipped.push_back({frame.frame_index, obj.id, obj.tag, "empty geometry"});
          continue;
        }
        text += format_yolo_line(*category, *box, size);
      }
    }
    out.files[fs::path(frame.image_file).stem().string() + ".txt"] = std::move(text);
  }
  return out;
}

YoloExport export_yolo(const AnnotationStore& store, const Project& project, const CategoryList& categories,
                       const fs::path& out_dir) {
  YoloExport out = build_yolo(store, project, categories);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
  for (const auto& [name, text] : out.files) write_text(out_dir / name, text);
  return out;
}

Rle rle_encode(const Bitmask& mask) {
  Rle rle{static_cast<int>(mask.rows()), static_cast<int>(mask.cols()), {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (Eigen::Index x = 0; x < mask.cols(); ++x) {
    for (Eigen::Index y = 0; y < mask.rows(); ++y) {
      const std::uint8_t v = mask(y, x) != 0 ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

Bitmask rle_decode(const Rle& rle) {
  Bitmask m = empty_mask(rle.width, rle.height);
  std::int64_t pos = 0;
  const std::int64_t total = std::int64_t{rle.width} * rle.height;
  std::uint8_t v = 0;
  for (const auto c : rle.counts) {
    if (pos + c > total) throw Error(ErrorCode::InvalidArgument, "RLE counts exceed the mask size");
    for (std::uint32_t k = 0; k < c; ++k, ++pos) {
      if (v != 0) m(pos % rle.height, pos / rle.height) = 1;
    }
    v ^= 1;
  }
  if (pos != total) throw Error(ErrorCode::InvalidArgument, "RLE counts do not cover the mask");
  return m;
}

namespace {

json rle_json(const Bitmask& bits) {
  const Rle rle = rle_encode(bits);
  return json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

json tight_bbox_json(const Bitmask& bits) {
  const BoundingBox b = mask_to_bbox(bits);
  return json::array({b.ul_x, b.ul_y, b.width(), b.height()});
}

}  // namespace

CocoExport build_coco(const AnnotationStore& store, const Project& project, CocoMaskMode mode,
                      const CategoryList* categories) {
  CocoExport out;
  json images = json::array();
  json annotations = json::array();
  json category_json = json::array();
  std::vector<std::string> seen_tags;

  if (categories != nullptr) {
    for (std::size_t i = 0; i < categories->entries.size(); ++i) {
      category_json.push_back({{"id", i + 1}, {"name", categories->entries[i]}});
    }
  }
  auto category_id = [&](const std::string& tag) -> std::optional<int> {
    if (categories != nullptr) {
      const auto idx = categories->index_of(tag);
      return idx ? std::optional(*idx + 1) : std::nullopt;
    }
    const auto it = std::find(seen_tags.begin(), seen_tags.end(), tag);
    if (it != seen_tags.end()) return static_cast<int>(it - seen_tags.begin()) + 1;
    seen_tags.push_back(tag);
    category_json.push_back({{"id", seen_tags.size()}, {"name", tag}});
    return static_cast<int>(seen_tags.size());
  };

  int next_ann = 1;
  for (const auto& frame : store.frames) {
    const int image_id = frame.frame_index + 1;
    std::optional<ImageSize> size;
    try {
      size = frame_image_size(project, frame);
    } catch (const Error&) {
      if (!frame.objects.empty()) throw;
    }
    images.push_back({{"id", image_id},
                      {"file_name", frame.image_file},
                      {"width", size ? size->width : 0},
                      {"height", size ? size->height : 0}});

    for (const auto& obj : frame.objects) {
      if (categories != nullptr && !categories->index_of(obj.tag)) {
        out.skipped.push_back({frame.frame_index, obj.id, obj.tag, "tag not in category list"});
        continue;
      }
      json ann{{"image_id", image_id}};
      const auto* box = std::get_if<BoundingBox>(&obj.geometry);
      const auto* poly = std::get_if<Polygon>(&obj.geometry);
      if (mode == CocoMaskMode::Polygon && (box != nullptr || poly != nullptr)) {
        Polygon p;
        if (box != nullptr) {
          p.points = {{box->ul_x, box->ul_y}, {box->lr_x, box->ul_y}, {box->lr_x, box->lr_y}, {box->ul_x, box->lr_y}};
        } else {
          p = *poly;
        }
        json flat = json::array();
        double lo_x = p.points.front().x(), lo_y = p.points.front().y(), hi_x = lo_x, hi_y = lo_y;
        for (const auto& q : p.points) {
          flat.push_back(q.x());
          flat.push_back(q.y());
          lo_x = std::min(lo_x, q.x());
          lo_y = std::min(lo_y, q.y());
          hi_x = std::max(hi_x, q.x());
          hi_y = std::max(hi_y, q.y());
        }
        ann["segmentation"] = json::array({flat});
        ann["area"] = polygon_area(p);
        ann["bbox"] = json::array({lo_x, lo_y, hi_x - lo_x, hi_y - lo_y});
        ann["iscrowd"] = 0;
      } else {
        Bitmask bits;
        if (box != nullptr) bits = box_raster(*box, *size);
        else if (poly != nullptr) bits = rasterize_polygon(*poly, size->width, size->height).bits;
        else bits = std::get<PixelMask>(obj.geometry).object;
        if ((bits == 0).all()) {
          out.skipped.push_back({frame.frame_index, obj.id, obj.tag, "empty geometry"});
          continue;
        }
        ann["segmentation"] = rle_json(bits);
        ann["area"] = popcount(bits);
        ann["bbox"] = tight_bbox_json(bits);
        ann["iscrowd"] = 1;
      }
      ann["id"] = next_ann++;
      ann["category_id"] = *category_id(obj.tag);
      annotations.push_back(std::move(ann));
    }
  }

  out.document = json{{"images", images}, {"categories", category_json}, {"annotations", annotations}};
  return out;
}

CocoExport export_coco(const AnnotationStore& store, const Project& project, const fs::path& out_path,
                       CocoMaskMode mode, const CategoryList* categories) {
  CocoExport out = build_coco(store, project, mode, categories);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  write_file_atomic(out_path, out.document.dump() + '\n');
  return out;
}

BoxConversion convert_pixel_to_box(const AnnotationStore& store, const Project& project) {
  BoxConversion out{project, store, {}};
  out.project.geometry_kind = GeometryKind::Box;
  for (auto& frame : out.store.frames) {
    frame.shared_dontcare.reset();
    std::vector<AnnotatedObject> kept;
    for (auto& obj : frame.objects) {
      std::optional<BoundingBox> box;
      if (const auto* m = std::get_if<PixelMask>(&obj.geometry)) {
        if ((m->object != 0).any()) box = mask_to_bbox(*m);
      } else if (const auto* p = std::get_if<Polygon>(&obj.geometry)) {
        std::optional<ImageSize> size = project.image_size;
        if (size) {
          const Bitmask bits = rasterize_polygon(*p, size->width, size->height).bits;
          if ((bits != 0).any()) box = mask_to_bbox(bits);
        } else if (const BoundingBox b = polygon_bounds(*p); !b.empty()) {
          box = b;
        }
      } else {
        box = std::get<BoundingBox>(obj.geometry);
      }
      if (!box) {
        out.dropped.push_back({frame.frame_index, obj.id, obj.tag, "empty geometry"});
        continue;
      }
      obj.geometry = *box;
      kept.push_back(std::move(obj));
    }
    frame.objects = std::move(kept);
  }
  return out;
}

}  // namespace annotweave
