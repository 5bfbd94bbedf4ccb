#include "annotweave/sequence/sequence.hpp"

#include <algorithm>
#include <cstdlib>

#include "annotweave/core/error.hpp"
#include "annotweave/mask/filters.hpp"
#include "annotweave/mask/polygon_raster.hpp"

namespace annotweave {
namespace {

void require_frame(const AnnotationStore& store, int idx) {
  if (!store.in_range(idx)) {
    throw Error(ErrorCode::InvalidArgument, "frame index " + std::to_string(idx) + " out of range");
  }
}

// floor(num / den + 1/2) for den > 0, exact in integers.
std::int64_t round_half_up(std::int64_t num, std::int64_t den) {
  const std::int64_t n2 = 2 * num + den;
  const std::int64_t d2 = 2 * den;
  std::int64_t q = n2 / d2;
  if ((n2 % d2 != 0) && (n2 < 0)) --q;
  return q;
}

// Keeps `frame.objects` in ascending ID order.
void insert_by_id(FrameAnnotations& frame, AnnotatedObject obj) {
  const auto at = std::lower_bound(frame.objects.begin(), frame.objects.end(), obj.id,
                                   [](const AnnotatedObject& o, ObjectId id) { return o.id < id; });
  frame.objects.insert(at, std::move(obj));
}

int blend(int a, int b, std::int64_t step, std::int64_t span) {
  return static_cast<int>(round_half_up(std::int64_t{a} * span + std::int64_t{b - a} * step, span));
}

PixelMask as_mask(const Geometry& g, ImageSize size) {
  if (const auto* m = std::get_if<PixelMask>(&g)) return *m;
  if (const auto* p = std::get_if<Polygon>(&g)) return PixelMask(rasterize_polygon(*p, size.width, size.height).bits);
  const auto& b = std::get<BoundingBox>(g);
  PixelMask m(size.width, size.height);
  const BoundingBox c = intersect(b, BoundingBox{0, 0, size.width, size.height});
  if (!c.empty()) m.object.block(c.ul_y, c.ul_x, c.height(), c.width()).setOnes();
  return m;
}

Geometry merge_geometry(const Geometry& keep, const Geometry& absorb, std::optional<ImageSize> canvas) {
  const auto* kb = std::get_if<BoundingBox>(&keep);
  const auto* ab = std::get_if<BoundingBox>(&absorb);
  if (kb && ab) return hull(*kb, *ab);

  ImageSize size{0, 0};
  if (const auto* m = std::get_if<PixelMask>(&keep)) size = {m->width(), m->height()};
  else if (const auto* m2 = std::get_if<PixelMask>(&absorb)) size = {m2->width(), m2->height()};
  else if (canvas) size = *canvas;
  else {
    const BoundingBox e = hull(*geometry_bounds(keep), *geometry_bounds(absorb));
    size = {std::max(e.lr_x, 1), std::max(e.lr_y, 1)};
  }
  PixelMask a = as_mask(keep, size);
  const PixelMask b = as_mask(absorb, size);
  a.object = (a.object != 0 || b.object != 0).cast<std::uint8_t>();
  a.dontcare = ((a.dontcare != 0 || b.dontcare != 0) && a.object == 0).cast<std::uint8_t>();
  return a;
}

}  // namespace

std::string to_string(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::Deleted: return "deleted";
    case ChangeKind::Relabeled: return "relabeled";
    case ChangeKind::Merged: return "merged";
  }
  return "unknown";
}

std::optional<BoundingBox> geometry_bounds(const Geometry& g) {
  if (const auto* b = std::get_if<BoundingBox>(&g)) return *b;
  if (const auto* p = std::get_if<Polygon>(&g)) return polygon_bounds(*p);
  const auto& m = std::get<PixelMask>(g);
  if ((m.object == 0).all()) return std::nullopt;
  return mask_to_bbox(m);
}

AnnotationStore retain(AnnotationStore store, int from_idx, int to_idx) {
  require_frame(store, from_idx);
  require_frame(store, to_idx);
  if (std::abs(from_idx - to_idx) != 1) throw Error(ErrorCode::InvalidArgument, "retain works on adjacent frames");
  const auto& src = store.frames[from_idx];
  auto& dst = store.frames[to_idx];
  for (const auto& obj : src.objects) {
    if (obj.status != ObjectStatus::Active || dst.find(obj.id) != nullptr) continue;
    insert_by_id(dst, obj);
  }
  return store;
}

AnnotationStore interpolate(AnnotationStore store, ObjectId id, int start_idx, int end_idx) {
  require_frame(store, start_idx);
  require_frame(store, end_idx);
  if (end_idx - start_idx < 2) throw Error(ErrorCode::InvalidArgument, "keyframes must be at least 2 frames apart");
  const AnnotatedObject* first = store.frames[start_idx].find(id);
  const AnnotatedObject* last = store.frames[end_idx].find(id);
  if (first == nullptr || last == nullptr) {
    throw Error(ErrorCode::MissingKeyframe, "track " + std::to_string(id.value) + " is not annotated at both keyframes");
  }
  const auto* a = std::get_if<BoundingBox>(&first->geometry);
  const auto* b = std::get_if<BoundingBox>(&last->geometry);
  if (a == nullptr || b == nullptr) throw Error(ErrorCode::NotBoxGeometry, "interpolation needs box keyframes");

  const AnnotatedObject start = *first;
  const BoundingBox ba = *a, bb = *b;
  const std::int64_t span = end_idx - start_idx;
  for (int n = start_idx + 1; n < end_idx; ++n) {
    const std::int64_t step = n - start_idx;
    AnnotatedObject obj = start;
    obj.geometry = BoundingBox{blend(ba.ul_x, bb.ul_x, step, span), blend(ba.ul_y, bb.ul_y, step, span),
                               blend(ba.lr_x, bb.lr_x, step, span), blend(ba.lr_y, bb.lr_y, step, span)};
    auto& frame = store.frames[n];
    if (auto* existing = frame.find(id)) {
      *existing = std::move(obj);
    } else {
      insert_by_id(frame, std::move(obj));
    }
  }
  return store;
}

ChangeReport plan_delete_forward(const AnnotationStore& store, const std::set<ObjectId>& ids, int from_idx) {
  require_frame(store, from_idx);
  ChangeReport report;
  for (int f = from_idx; f < store.size(); ++f) {
    for (const auto& obj : store.frames[f].objects) {
      if (ids.contains(obj.id)) report.push_back({f, obj.id, ChangeKind::Deleted});
    }
  }
  return report;
}

EditResult delete_forward(AnnotationStore store, const std::set<ObjectId>& ids, int from_idx) {
  ChangeReport report = plan_delete_forward(store, ids, from_idx);
  for (const auto& e : report) store.frames[e.frame].erase(e.id);
  return {std::move(store), std::move(report)};
}

ChangeReport plan_merge_forward(const AnnotationStore& store, ObjectId keep, ObjectId absorb, int from_idx) {
  if (keep == absorb) throw Error(ErrorCode::SameId, "cannot merge a track into itself");
  require_frame(store, from_idx);
  ChangeReport report;
  for (int f = from_idx; f < store.size(); ++f) {
    const auto& frame = store.frames[f];
    if (frame.find(absorb) == nullptr) continue;
    report.push_back({f, absorb, frame.find(keep) != nullptr ? ChangeKind::Merged : ChangeKind::Relabeled});
  }
  return report;
}

EditResult merge_forward(AnnotationStore store, ObjectId keep, ObjectId absorb, int from_idx,
                         std::optional<ImageSize> canvas) {
  ChangeReport report = plan_merge_forward(store, keep, absorb, from_idx);
  for (const auto& e : report) {
    auto& frame = store.frames[e.frame];
    if (e.kind == ChangeKind::Relabeled) {
      frame.find(absorb)->id = keep;
      continue;
    }
    AnnotatedObject* k = frame.find(keep);
    k->geometry = merge_geometry(k->geometry, frame.find(absorb)->geometry, canvas);
    frame.erase(absorb);
  }
  // Frames keep their objects in ascending ID order.
  for (const auto& e : report) {
    auto& objects = store.frames[e.frame].objects;
    std::stable_sort(objects.begin(), objects.end(),
                     [](const AnnotatedObject& a, const AnnotatedObject& b) { return a.id < b.id; });
  }
  return {std::move(store), std::move(report)};
}

std::vector<std::optional<HistorySlot>> history_window(const AnnotationStore& store, ObjectId id, int center_idx,
                                                       int radius) {
  require_frame(store, center_idx);
  std::vector<std::optional<HistorySlot>> slots;
  slots.reserve(static_cast<std::size_t>(2 * radius + 1));
  for (int f = center_idx - radius; f <= center_idx + radius; ++f) {
    std::optional<HistorySlot> slot;
    if (store.in_range(f)) {
      if (const auto* obj = store.frames[f].find(id)) {
        if (auto b = geometry_bounds(obj->geometry)) slot = HistorySlot{f, *b};
      }
    }
    slots.push_back(slot);
  }
  return slots;
}

}  // namespace annotweave
