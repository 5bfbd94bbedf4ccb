#include "annotweave/mask/filters.hpp"

#include <algorithm>
#include <vector>

#include "annotweave/core/error.hpp"

namespace annotweave {

Components label_components(const Bitmask& bits, bool eight_connected) {
  const int h = static_cast<int>(bits.rows());
  const int w = static_cast<int>(bits.cols());
  Components c{Raster<std::int32_t>::Zero(h, w), {}};
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (bits(y, x) == 0 || c.labels(y, x) != 0) continue;
      const auto label = static_cast<std::int32_t>(c.areas.size() + 1);
      std::int64_t area = 0;
      c.labels(y, x) = label;
      stack.emplace_back(x, y);
      while (!stack.empty()) {
        const auto [px, py] = stack.back();
        stack.pop_back();
        ++area;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dx == 0 && dy == 0) || (!eight_connected && dx != 0 && dy != 0)) continue;
            const int nx = px + dx, ny = py + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (bits(ny, nx) == 0 || c.labels(ny, nx) != 0) continue;
            c.labels(ny, nx) = label;
            stack.emplace_back(nx, ny);
          }
        }
      }
      c.areas.push_back(area);
    }
  }
  return c;
}

PixelMask remove_noise(PixelMask mask, int min_area) {
  const Components comps = label_components(mask.object, true);
  if (comps.areas.empty()) return mask;
  const auto largest = std::max_element(comps.areas.begin(), comps.areas.end()) - comps.areas.begin();
  std::vector<bool> keep(comps.areas.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    keep[k] = comps.areas[k] >= min_area || static_cast<std::ptrdiff_t>(k) == largest;
  }
  for (Eigen::Index y = 0; y < mask.object.rows(); ++y) {
    for (Eigen::Index x = 0; x < mask.object.cols(); ++x) {
      const auto l = comps.labels(y, x);
      if (l != 0 && !keep[l - 1]) mask.object(y, x) = 0;
    }
  }
  return mask;
}

PixelMask fill_holes(PixelMask mask) {
  const int h = mask.height();
  const int w = mask.width();
  if (h == 0 || w == 0) return mask;
  // Flood the background from every border pixel with 4-connectivity.
  Bitmask reached = empty_mask(w, h);
  std::vector<std::pair<int, int>> stack;
  auto seed = [&](int x, int y) {
    if (mask.object(y, x) == 0 && reached(y, x) == 0) {
      reached(y, x) = 1;
      stack.emplace_back(x, y);
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  constexpr int kDx[] = {1, -1, 0, 0};
  constexpr int kDy[] = {0, 0, 1, -1};
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    for (int k = 0; k < 4; ++k) {
      const int nx = x + kDx[k], ny = y + kDy[k];
      if (nx >= 0 && ny >= 0 && nx < w && ny < h) seed(nx, ny);
    }
  }
  mask.object = (reached == 0).cast<std::uint8_t>();
  mask.dontcare = (mask.dontcare != 0 && mask.object == 0).cast<std::uint8_t>();
  return mask;
}

PixelMask add_dontcare_border(PixelMask mask, int width) {
  if (width < 0) throw Error(ErrorCode::InvalidArgument, "border width must be >= 0");
  const int h = mask.height();
  const int w = mask.width();
  mask.dontcare = empty_mask(w, h);
  if (width == 0) return mask;
  const int r2 = width * width;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.object(y, x) == 0) continue;
      // Interior pixels add nothing beyond what their boundary neighbours stamp.
      const bool interior = x > 0 && y > 0 && x + 1 < w && y + 1 < h && mask.object(y, x - 1) &&
                            mask.object(y, x + 1) && mask.object(y - 1, x) && mask.object(y + 1, x);
      if (interior) continue;
      for (int dy = -width; dy <= width; ++dy) {
        const int ny = y + dy;
        if (ny < 0 || ny >= h) continue;
        for (int dx = -width; dx <= width; ++dx) {
          const int nx = x + dx;
          if (nx < 0 || nx >= w || dx * dx + dy * dy > r2) continue;
          if (mask.object(ny, nx) == 0) mask.dontcare(ny, nx) = 1;
        }
      }
    }
  }
  return mask;
}

BoundingBox mask_to_bbox(const Bitmask& bits) {
  int min_x = static_cast<int>(bits.cols()), min_y = static_cast<int>(bits.rows());
  int max_x = -1, max_y = -1;
  for (int y = 0; y < bits.rows(); ++y) {
    for (int x = 0; x < bits.cols(); ++x) {
      if (bits(y, x) == 0) continue;
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x < 0) throw Error(ErrorCode::EmptyMask, "mask has no object pixels");
  return {min_x, min_y, max_x + 1, max_y + 1};
}

BoundingBox mask_to_bbox(const PixelMask& mask) { return mask_to_bbox(mask.object); }

}  // namespace annotweave
