#include "annotweave/service/mutations.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "annotweave/core/error.hpp"
#include "annotweave/core/validate.hpp"
#include "annotweave/mask/brush.hpp"
#include "annotweave/mask/filters.hpp"
#include "annotweave/mask/polygon_raster.hpp"
#include "annotweave/sequence/sequence.hpp"
#include "annotweave/service/json_codec.hpp"
#include "annotweave/storage/frames.hpp"
#include "annotweave/storage/project_io.hpp"

namespace annotweave {

using nlohmann::json;
using wire::field;
using wire::field_or;

namespace {

struct Context {
  Project& project;
  AnnotationStore& store;
  const json& args;
  json& reply;
  bool& changed;
};

FrameAnnotations& frame_at(AnnotationStore& store, int idx) {
  if (!store.in_range(idx)) {
    throw Error(ErrorCode::NotFound, "frame " + std::to_string(idx) + " does not exist", std::to_string(idx));
  }
  return store.frames[idx];
}

AnnotatedObject& object_at(FrameAnnotations& frame, ObjectId id) {
  auto* obj = frame.find(id);
  if (obj == nullptr) {
    throw Error(ErrorCode::NotFound,
                "object " + std::to_string(id.value) + " not in frame " + std::to_string(frame.frame_index),
                std::to_string(id.value));
  }
  return *obj;
}

PixelMask& mask_of(AnnotatedObject& obj) {
  auto* mask = std::get_if<PixelMask>(&obj.geometry);
  if (mask == nullptr) throw Error(ErrorCode::InvalidArgument, "object " + std::to_string(obj.id.value) + " is not a mask");
  return *mask;
}

void require_valid(const AnnotatedObject& obj, const Project& project) {
  const auto violations = validate_object(obj, project);
  if (violations.empty()) return;
  std::string codes;
  std::string messages;
  for (const auto& v : violations) {
    codes += (codes.empty() ? "" : ",") + v.code;
    messages += (messages.empty() ? "" : "; ") + v.message;
  }
  throw Error(ErrorCode::InvalidArgument, messages, codes);
}

// Object bits of `owner` must not cover any other object; don't-care bits never sit under object bits.
void settle_masks(FrameAnnotations& frame, ObjectId owner) {
  const AnnotatedObject* own = frame.find(owner);
  if (own == nullptr) return;
  const auto* own_mask = std::get_if<PixelMask>(&own->geometry);
  if (own_mask == nullptr) return;
  Bitmask covered = empty_mask(own_mask->width(), own_mask->height());
  for (const auto& obj : frame.objects) {
    const auto* m = std::get_if<PixelMask>(&obj.geometry);
    if (m == nullptr || !same_shape(m->object, covered)) continue;
    if (obj.id != owner) {
      const auto overlap = ((m->object != 0) && (own_mask->object != 0)).count();
      if (overlap > 0) {
        throw Error(ErrorCode::OverlappingObjects,
                    "object " + std::to_string(owner.value) + " overlaps object " + std::to_string(obj.id.value),
                    std::to_string(overlap));
      }
    }
    covered = (covered != 0 || m->object != 0).cast<std::uint8_t>();
  }
  for (auto& obj : frame.objects) {
    if (auto* m = std::get_if<PixelMask>(&obj.geometry); m != nullptr && same_shape(m->dontcare, covered)) {
      m->dontcare = (m->dontcare != 0 && covered == 0).cast<std::uint8_t>();
    }
  }
  if (frame.shared_dontcare && same_shape(*frame.shared_dontcare, covered)) {
    *frame.shared_dontcare = (*frame.shared_dontcare != 0 && covered == 0).cast<std::uint8_t>();
  }
}

void put_object(Context& c, int frame_idx, AnnotatedObject obj) {
  require_valid(obj, c.project);
  auto& frame = frame_at(c.store, frame_idx);
  const ObjectId id = obj.id;
  if (auto* existing = frame.find(id)) {
    *existing = std::move(obj);
  } else {
    frame.objects.push_back(std::move(obj));
    std::sort(frame.objects.begin(), frame.objects.end(),
              [](const AnnotatedObject& a, const AnnotatedObject& b) { return a.id < b.id; });
  }
  settle_masks(frame, id);
}

ObjectId id_arg(const json& args, const char* name = "id") { return ObjectId{field<std::int64_t>(args, name)}; }

void op_create_object(Context& c) {
  const int idx = field<int>(c.args, "frame");
  frame_at(c.store, idx);
  json wire_obj = field<json>(c.args, "object");
  const bool assign = !wire_obj.contains("id") || wire_obj.at("id").is_null();
  AnnotatedObject obj = wire::object_from_json(wire_obj, c.project.meta_schema);
  if (assign) obj.id = next_free_id(c.project, c.store);
  if (c.store.frames[idx].find(obj.id) != nullptr) {
    throw Error(ErrorCode::InvalidArgument, "object " + std::to_string(obj.id.value) + " already exists in this frame",
                std::to_string(obj.id.value));
  }
  c.reply["id"] = obj.id.value;
  put_object(c, idx, std::move(obj));
}

void op_update_object(Context& c) {
  const int idx = field<int>(c.args, "frame");
  AnnotatedObject obj = object_at(frame_at(c.store, idx), id_arg(c.args));
  if (c.args.contains("tag")) obj.tag = field<std::string>(c.args, "tag");
  if (c.args.contains("status")) obj.status = wire::status_from_string(field<std::string>(c.args, "status"));
  if (c.args.contains("meta")) {
    const json meta = field<json>(c.args, "meta");
    if (!meta.is_object()) throw Error(ErrorCode::InvalidArgument, "meta must be an object", "meta");
    for (const auto& [k, v] : meta.items()) {
      if (!v.is_boolean()) throw Error(ErrorCode::InvalidArgument, "meta field '" + k + "' must be a boolean", k);
      obj.meta[k] = v.get<bool>();
    }
  }
  if (c.args.contains("geometry")) obj.geometry = wire::geometry_from_json(c.args.at("geometry"));
  c.reply["id"] = obj.id.value;
  put_object(c, idx, std::move(obj));
}

void op_delete_object(Context& c) {
  auto& frame = frame_at(c.store, field<int>(c.args, "frame"));
  const ObjectId id = id_arg(c.args);
  object_at(frame, id);
  frame.erase(id);
}

void op_brush(Context& c) {
  const int idx = field<int>(c.args, "frame");
  AnnotatedObject obj = object_at(frame_at(c.store, idx), id_arg(c.args));
  PixelMask& mask = mask_of(obj);
  mask = apply_brush(std::move(mask), wire::brush_from_json(field<json>(c.args, "brush")));
  put_object(c, idx, std::move(obj));
}

void op_filter(Context& c) {
  const int idx = field<int>(c.args, "frame");
  AnnotatedObject obj = object_at(frame_at(c.store, idx), id_arg(c.args));
  PixelMask& mask = mask_of(obj);
  const auto filter = field<std::string>(c.args, "filter");
  if (filter == "remove_noise") {
    mask = remove_noise(std::move(mask), field_or<int>(c.args, "min_area", kDefaultMinNoiseArea));
  } else if (filter == "fill_holes") {
    mask = fill_holes(std::move(mask));
  } else if (filter == "dontcare_border") {
    mask = add_dontcare_border(std::move(mask), field_or<int>(c.args, "width", c.project.dontcare_border_width));
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown filter '" + filter + "'", filter);
  }
  put_object(c, idx, std::move(obj));
}

void op_rasterize(Context& c) {
  const int idx = field<int>(c.args, "frame");
  AnnotatedObject obj = object_at(frame_at(c.store, idx), id_arg(c.args));
  const auto* poly = std::get_if<Polygon>(&obj.geometry);
  if (poly == nullptr) throw Error(ErrorCode::InvalidArgument, "object is not a polygon");
  if (!c.project.image_size) throw Error(ErrorCode::InvalidArgument, "project image size unknown");
  auto raster = rasterize_polygon(*poly, c.project.image_size->width, c.project.image_size->height);
  if (raster.degenerate) throw Error(ErrorCode::InvalidArgument, "polygon covers no pixel center", "degenerate");
  obj.geometry = PixelMask(std::move(raster.bits));
  put_object(c, idx, std::move(obj));
}

void op_retain(Context& c) {
  c.store = retain(std::move(c.store), field<int>(c.args, "from"), field<int>(c.args, "to"));
}

void op_interpolate(Context& c) {
  c.store = interpolate(std::move(c.store), id_arg(c.args), field<int>(c.args, "start"), field<int>(c.args, "end"));
}

void op_delete_forward(Context& c) {
  std::set<ObjectId> ids;
  for (const auto v : field<std::vector<std::int64_t>>(c.args, "ids")) ids.insert(ObjectId{v});
  const int from = field<int>(c.args, "from");
  const bool confirm = field_or<bool>(c.args, "confirm", false);
  c.reply["confirmed"] = confirm;
  if (!confirm) {
    c.reply["report"] = wire::to_json(plan_delete_forward(c.store, ids, from));
    c.changed = false;
    return;
  }
  auto result = delete_forward(std::move(c.store), ids, from);
  c.store = std::move(result.store);
  c.reply["report"] = wire::to_json(result.report);
}

void op_merge_forward(Context& c) {
  const ObjectId keep = id_arg(c.args, "keep");
  const ObjectId absorb = id_arg(c.args, "absorb");
  const int from = field<int>(c.args, "from");
  const bool confirm = field_or<bool>(c.args, "confirm", false);
  c.reply["confirmed"] = confirm;
  if (!confirm) {
    c.reply["report"] = wire::to_json(plan_merge_forward(c.store, keep, absorb, from));
    c.changed = false;
    return;
  }
  auto result = merge_forward(std::move(c.store), keep, absorb, from, c.project.image_size);
  c.store = std::move(result.store);
  c.reply["report"] = wire::to_json(result.report);
}

void op_set_tags(Context& c) {
  c.project = replace_suggested_tags(std::move(c.project), field<std::vector<std::string>>(c.args, "tags"));
  c.project.limit_tags = field_or<bool>(c.args, "limit_tags", c.project.limit_tags);
}

void op_set_meta_schema(Context& c) {
  const auto names = field<std::vector<std::string>>(c.args, "names");
  std::vector<std::string> removed;
  for (const auto& old : c.project.meta_schema.names) {
    if (std::find(names.begin(), names.end(), old) == names.end()) removed.push_back(old);
  }
  const bool confirm = field_or<bool>(c.args, "confirm", false);
  c.reply["confirmed"] = confirm;
  c.reply["fields_in_use"] = fields_in_use(c.store, removed);
  auto edit = replace_meta_schema(std::move(c.project), std::move(c.store), names, confirm);
  c.project = std::move(edit.project);
  c.store = std::move(edit.store);
}

void op_set_border_width(Context& c) {
  const int width = field<int>(c.args, "width");
  if (width < 0) throw Error(ErrorCode::InvalidArgument, "border width must be >= 0");
  c.project.dontcare_border_width = width;
}

// Frames with annotations survive a pattern change even when the new pattern no longer matches them.
void op_set_frame_pattern(Context& c) {
  const auto pattern = field<std::string>(c.args, "pattern");
  auto frames = field<std::vector<std::string>>(c.args, "frames");
  std::map<std::string, FrameAnnotations> kept;
  for (auto& frame : c.store.frames) {
    if (!frame.objects.empty() || frame.shared_dontcare) kept.emplace(frame.image_file, std::move(frame));
  }
  std::set<std::string> listed(frames.begin(), frames.end());
  for (const auto& [file, _] : kept) {
    if (listed.insert(file).second) frames.push_back(file);
  }
  natural_sort(frames);
  c.project.modalities.rgb.pattern = pattern;
  c.project.frame_files = std::move(frames);
  AnnotationStore store = make_store(c.project);
  for (auto& frame : store.frames) {
    if (auto it = kept.find(frame.image_file); it != kept.end()) {
      const int idx = frame.frame_index;
      frame = std::move(it->second);
      frame.frame_index = idx;
    }
  }
  c.store = std::move(store);
}

using Handler = std::function<void(Context&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"create_object", op_create_object},       {"update_object", op_update_object},
      {"delete_object", op_delete_object},       {"brush", op_brush},
      {"filter", op_filter},                     {"rasterize_polygon", op_rasterize},
      {"retain", op_retain},                     {"interpolate", op_interpolate},
      {"delete_forward", op_delete_forward},     {"merge_forward", op_merge_forward},
      {"set_tags", op_set_tags},                 {"set_meta_schema", op_set_meta_schema},
      {"set_border_width", op_set_border_width}, {"set_frame_pattern", op_set_frame_pattern},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& mutation_ops() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : handlers()) out.push_back(name);
    return out;
  }();
  return names;
}

MutationResult apply_mutation(Project project, AnnotationStore store, const Mutation& mutation) {
  const auto it = handlers().find(mutation.op);
  if (it == handlers().end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown operation '" + mutation.op + "'", mutation.op);
  }
  const AnnotationStore before = store;
  MutationResult out;
  Context ctx{project, store, mutation.args, out.reply, out.changed};
  it->second(ctx);

  if (store.size() != before.size()) {
    for (int i = 0; i < store.size(); ++i) out.affected_frames.push_back(i);
  } else {
    for (int i = 0; i < store.size(); ++i) {
      if (!(store.frames[i] == before.frames[i])) out.affected_frames.push_back(i);
    }
  }
  out.project = std::move(project);
  out.store = std::move(store);
  return out;
}

json to_json(const Mutation& m) { return json{{"op", m.op}, {"args", m.args}}; }

Mutation mutation_from_json(const json& j) {
  return Mutation{field<std::string>(j, "op"), field_or<json>(j, "args", json::object())};
}

}  // namespace annotweave
