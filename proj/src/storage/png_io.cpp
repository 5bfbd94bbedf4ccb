#include "annotweave/storage/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>
#include <string>

#include "annotweave/core/error.hpp"

namespace annotweave {
namespace {

class PngReader {
 public:
  explicit PngReader(const std::filesystem::path& path) : path_(path) {
    std::memset(&image_, 0, sizeof image_);
    image_.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&image_, path.c_str()) == 0) fail();
  }
  explicit PngReader(const std::vector<std::uint8_t>& bytes) : path_("<memory>") {
    std::memset(&image_, 0, sizeof image_);
    image_.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_memory(&image_, bytes.data(), bytes.size()) == 0) fail();
  }
  ~PngReader() { png_image_free(&image_); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  [[nodiscard]] ImageSize size() const {
    return {static_cast<int>(image_.width), static_cast<int>(image_.height)};
  }

  void finish(png_uint_32 format, void* buffer) {
    image_.format = format;
    if (png_image_finish_read(&image_, nullptr, buffer, 0, nullptr) == 0) fail();
  }

 private:
  [[noreturn]] void fail() {
    const std::string msg = image_.message;
    png_image_free(&image_);
    throw Error(ErrorCode::IoFailure, "cannot decode PNG " + path_.string() + ": " + msg);
  }

  std::filesystem::path path_;
  png_image image_;
};

std::vector<std::uint8_t> encode(const void* data, int width, int height, png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  png_alloc_size_t size = 0;
  if (png_image_write_to_memory(&image, nullptr, &size, 0, data, 0, nullptr) == 0) {
    throw Error(ErrorCode::IoFailure, std::string("PNG encoding failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (png_image_write_to_memory(&image, out.data(), &size, 0, data, 0, nullptr) == 0) {
    throw Error(ErrorCode::IoFailure, std::string("PNG encoding failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

GrayImage read_png_gray(const std::filesystem::path& path) {
  PngReader reader(path);
  const auto s = reader.size();
  GrayImage out(s.height, s.width);
  reader.finish(PNG_FORMAT_GRAY, out.data());
  return out;
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  PngReader reader(path);
  const auto s = reader.size();
  RgbImage out(s.width, s.height);
  reader.finish(PNG_FORMAT_RGB, out.pixels.data());
  return out;
}

RgbImage decode_png_rgb(const std::vector<std::uint8_t>& bytes) {
  PngReader reader(bytes);
  const auto s = reader.size();
  RgbImage out(s.width, s.height);
  reader.finish(PNG_FORMAT_RGB, out.pixels.data());
  return out;
}

ImageSize read_png_size(const std::filesystem::path& path) { return PngReader(path).size(); }

std::vector<std::uint8_t> encode_png_gray(const GrayImage& image) {
  return encode(image.data(), static_cast<int>(image.cols()), static_cast<int>(image.rows()), PNG_FORMAT_GRAY);
}

std::vector<std::uint8_t> encode_png_rgb(const RgbImage& image) {
  return encode(image.pixels.data(), image.width, image.height, PNG_FORMAT_RGB);
}

void write_png_gray(const std::filesystem::path& path, const GrayImage& image) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.cols());
  img.height = static_cast<png_uint_32>(image.rows());
  img.format = PNG_FORMAT_GRAY;
  if (png_image_write_to_file(&img, path.c_str(), 0, image.data(), 0, nullptr) == 0) {
    throw Error(ErrorCode::IoFailure, "cannot write PNG " + path.string() + ": " + img.message);
  }
}

RgbImage downscale(const RgbImage& image, int max_side) {
  const int longest = std::max(image.width, image.height);
  if (longest <= max_side || max_side <= 0) return image;
  const int factor = (longest + max_side - 1) / max_side;
  const int w = std::max(1, image.width / factor);
  const int h = std::max(1, image.height / factor);
  RgbImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Eigen::Vector3d acc = Eigen::Vector3d::Zero();
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) acc += image.color(x * factor + dx, y * factor + dy);
      }
      acc /= static_cast<double>(factor * factor);
      out.set(x, y, static_cast<std::uint8_t>(acc.x() + 0.5), static_cast<std::uint8_t>(acc.y() + 0.5),
              static_cast<std::uint8_t>(acc.z() + 0.5));
    }
  }
  return out;
}

}  // namespace annotweave
