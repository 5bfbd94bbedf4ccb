#pragma once

#include "annotweave/core/model.hpp"

namespace annotweave {

struct RasterizedPolygon {
  Bitmask bits;
  /// Collinear vertices or no pixel center covered.
  bool degenerate = false;
};

/// Even-odd scanline fill sampling pixel centers (x + 0.5, y + 0.5).
[[nodiscard]] RasterizedPolygon rasterize_polygon(const Polygon& poly, int width, int height);

/// Shoelace area (absolute value).
[[nodiscard]] double polygon_area(const Polygon& poly);

/// Integer box covering the vertex extents: floor of the minimum, ceil of the maximum.
[[nodiscard]] BoundingBox polygon_bounds(const Polygon& poly);

}  // namespace annotweave
