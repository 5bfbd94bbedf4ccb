#include "annotweave/mask/polygon_raster.hpp"

#include <algorithm>
#include <cmath>

namespace annotweave {

double polygon_area(const Polygon& poly) {
  const auto& p = poly.points;
  double twice = 0.0;
  for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
    twice += p[j].x() * p[i].y() - p[i].x() * p[j].y();
  }
  return p.empty() ? 0.0 : std::abs(twice) * 0.5;
}

BoundingBox polygon_bounds(const Polygon& poly) {
  if (poly.points.empty()) return {};
  Eigen::Vector2d lo = poly.points.front(), hi = poly.points.front();
  for (const auto& q : poly.points) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  return {static_cast<int>(std::floor(lo.x())), static_cast<int>(std::floor(lo.y())),
          static_cast<int>(std::ceil(hi.x())), static_cast<int>(std::ceil(hi.y()))};
}

namespace {

bool all_collinear(const std::vector<Eigen::Vector2d>& p) {
  for (std::size_t i = 2; i < p.size(); ++i) {
    const Eigen::Vector2d a = p[1] - p[0];
    const Eigen::Vector2d b = p[i] - p[0];
    if (a.x() * b.y() - a.y() * b.x() != 0.0) return false;
  }
  return true;
}

}  // namespace

RasterizedPolygon rasterize_polygon(const Polygon& poly, int width, int height) {
  RasterizedPolygon out{empty_mask(width, height), false};
  const auto& p = poly.points;
  if (p.size() < 3 || all_collinear(p)) {
    out.degenerate = true;
    return out;
  }

  const BoundingBox bounds = intersect(polygon_bounds(poly), BoundingBox{0, 0, width, height});
  std::vector<double> xs;
  for (int y = std::max(bounds.ul_y - 1, 0); y < std::min(bounds.lr_y + 1, height); ++y) {
    const double cy = y + 0.5;
    xs.clear();
    // Half-open rule on y: an edge counts when exactly one endpoint lies strictly above the center line.
    for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
      if ((p[i].y() > cy) != (p[j].y() > cy)) {
        xs.push_back((p[j].x() - p[i].x()) * (cy - p[i].y()) / (p[j].y() - p[i].y()) + p[i].x());
      }
    }
    std::sort(xs.begin(), xs.end());
    // A center is inside when an odd number of crossings lie strictly to its right,
    // i.e. it falls in [xs[2k], xs[2k+1]).
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int x0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      int x1 = static_cast<int>(std::ceil(xs[k + 1] - 0.5));  // first center >= xs[k+1]
      x1 = std::min(x1, width);
      for (int x = x0; x < x1; ++x) out.bits(y, x) = 1;
    }
  }
  out.degenerate = (out.bits == 0).all();
  return out;
}

}  // namespace annotweave
