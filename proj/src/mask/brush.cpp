#include "annotweave/mask/brush.hpp"

#include "annotweave/core/error.hpp"

namespace annotweave {

Bitmask brush_footprint(const Brush& brush, int width, int height) {
  Bitmask out = empty_mask(width, height);
  const int r = std::max(brush.radius, 0);
  const int r2 = r * r;
  for (const auto& c : brush.stroke) {
    for (int dy = -r; dy <= r; ++dy) {
      const int y = c.y() + dy;
      if (y < 0 || y >= height) continue;
      for (int dx = -r; dx <= r; ++dx) {
        const int x = c.x() + dx;
        if (x < 0 || x >= width || dx * dx + dy * dy > r2) continue;
        out(y, x) = 1;
      }
    }
  }
  return out;
}

PixelMask apply_brush(PixelMask mask, const Brush& brush) {
  if (brush.stroke.empty()) throw Error(ErrorCode::InvalidArgument, "brush stroke is empty");
  if (brush.radius < 1) throw Error(ErrorCode::InvalidArgument, "brush radius must be >= 1");
  const Bitmask foot = brush_footprint(brush, mask.width(), mask.height());
  switch (brush.kind) {
    case BrushKind::AddToMask:
      mask.object = (mask.object != 0 || foot != 0).cast<std::uint8_t>();
      break;
    case BrushKind::RemoveFromMask:
      mask.object = (mask.object != 0 && foot == 0).cast<std::uint8_t>();
      break;
    default:
      throw Error(ErrorCode::InvalidArgument, "GrabCut brushes are applied through grabcut_refine");
  }
  mask.dontcare = (mask.dontcare != 0 && mask.object == 0).cast<std::uint8_t>();
  return mask;
}

}  // namespace annotweave
