#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "annotweave/core/model.hpp"

namespace annotweave {

enum class ChangeKind { Deleted, Relabeled, Merged };

struct ChangeEntry {
  int frame = 0;
  ObjectId id;
  ChangeKind kind = ChangeKind::Deleted;

  friend bool operator==(const ChangeEntry&, const ChangeEntry&) = default;
};

using ChangeReport = std::vector<ChangeEntry>;

[[nodiscard]] std::string to_string(ChangeKind kind);

struct EditResult {
  AnnotationStore store;
  ChangeReport report;
};

/// Copies every Active object of `from_idx` that is absent from `to_idx` (|from - to| must be 1).
[[nodiscard]] AnnotationStore retain(AnnotationStore store, int from_idx, int to_idx);

/// Linear box interpolation between two keyframes of one track, rounding half-up.
/// Intermediate annotations of the track are overwritten; tag, meta and status come from the start keyframe.
[[nodiscard]] AnnotationStore interpolate(AnnotationStore store, ObjectId id, int start_idx, int end_idx);

/// The (frame, id) pairs delete_forward would remove. Never mutates.
[[nodiscard]] ChangeReport plan_delete_forward(const AnnotationStore& store, const std::set<ObjectId>& ids,
                                               int from_idx);
[[nodiscard]] EditResult delete_forward(AnnotationStore store, const std::set<ObjectId>& ids, int from_idx);

/// The changes merge_forward would make. Throws Error(SameId) when keep == absorb.
[[nodiscard]] ChangeReport plan_merge_forward(const AnnotationStore& store, ObjectId keep, ObjectId absorb,
                                              int from_idx);
/// Folds `absorb` into `keep` in frames >= from_idx: relabels where only absorb exists,
/// unions the geometries where both exist. `canvas` sizes rasters when polygons must be merged.
[[nodiscard]] EditResult merge_forward(AnnotationStore store, ObjectId keep, ObjectId absorb, int from_idx,
                                       std::optional<ImageSize> canvas = std::nullopt);

struct HistorySlot {
  int frame = 0;
  BoundingBox box;

  friend bool operator==(const HistorySlot&, const HistorySlot&) = default;
};

inline constexpr int kDefaultHistoryRadius = 5;

/// 2 * radius + 1 slots centred on `center_idx`; a slot is empty when the frame
/// is outside the sequence or the track is absent there.
[[nodiscard]] std::vector<std::optional<HistorySlot>> history_window(const AnnotationStore& store, ObjectId id,
                                                                     int center_idx,
                                                                     int radius = kDefaultHistoryRadius);

/// Axis-aligned extent of any geometry (boxes as-is, masks tight, polygons by vertex bounds).
[[nodiscard]] std::optional<BoundingBox> geometry_bounds(const Geometry& g);

}  // namespace annotweave
