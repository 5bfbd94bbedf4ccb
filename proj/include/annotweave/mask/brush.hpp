#pragma once

#include <vector>

#include <Eigen/Core>

#include "annotweave/core/model.hpp"

namespace annotweave {

enum class BrushKind { TruePositive, TrueNegative, AddToMask, RemoveFromMask };

struct Brush {
  BrushKind kind = BrushKind::AddToMask;
  int radius = 1;
  std::vector<Eigen::Vector2i> stroke;
};

/// Union of discs (Euclidean distance <= radius) around each stroke center, clipped to the image.
[[nodiscard]] Bitmask brush_footprint(const Brush& brush, int width, int height);

/// AddToMask / RemoveFromMask on the object bits; don't-care bits are cleared under object bits.
/// Throws Error(InvalidArgument) for GrabCut brush kinds or an empty stroke.
[[nodiscard]] PixelMask apply_brush(PixelMask mask, const Brush& brush);

}  // namespace annotweave
