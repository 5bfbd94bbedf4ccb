#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace annotweave {

/// Row-major 2D raster: rows() is the image height, cols() the width.
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Binary raster holding 0/1 per pixel.
using Bitmask = Raster<std::uint8_t>;
using GrayImage = Raster<std::uint8_t>;

/// Interleaved 8-bit colour image: one row per pixel (index y * width + x), one column per channel.
struct RgbImage {
  int width = 0;
  int height = 0;
  Eigen::Array<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor> pixels;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<Eigen::Index>(w) * h, 3) {
    pixels.setZero();
  }

  [[nodiscard]] Eigen::Index index(int x, int y) const {
    return static_cast<Eigen::Index>(y) * width + x;
  }
  [[nodiscard]] Eigen::Vector3d color(int x, int y) const {
    return pixels.row(index(x, y)).cast<double>().transpose().matrix();
  }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    pixels(index(x, y), 0) = r;
    pixels(index(x, y), 1) = g;
    pixels(index(x, y), 2) = b;
  }
};

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

inline Bitmask empty_mask(int width, int height) { return Bitmask::Zero(height, width); }

inline bool same_shape(const Bitmask& a, const Bitmask& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

inline bool raster_equal(const Bitmask& a, const Bitmask& b) {
  return same_shape(a, b) && (a == b).all();
}

inline std::int64_t popcount(const Bitmask& m) { return (m != 0).count(); }

}  // namespace annotweave
