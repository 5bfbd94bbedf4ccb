#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "annotweave/core/error.hpp"
#include "annotweave/core/model.hpp"

namespace annotweave {

enum class HomographyDirection { RgbToThermal, ThermalToRgb };

/// Planar projective map between the RGB (master) and thermal image planes.
template <typename Scalar>
class Homography {
 public:
  using Matrix = Eigen::Matrix<Scalar, 3, 3>;
  using Point = Eigen::Matrix<Scalar, 2, 1>;

  static constexpr Scalar kSingularTolerance = Scalar(1e-12);
  static constexpr Scalar kInfinityTolerance = Scalar(1e-12);

  Homography() = default;

  /// Normalises m so m(2,2) == 1 when that entry is nonzero. Throws Error(SingularMatrix).
  Homography(const Matrix& m, HomographyDirection direction) : m_(m), direction_(direction) {
    const Scalar scale = m_.cwiseAbs().maxCoeff();
    if (!(scale > Scalar(0)) || std::abs(m_.determinant()) <= kSingularTolerance * scale * scale * scale) {
      throw Error(ErrorCode::SingularMatrix, "homography matrix is singular");
    }
    if (m_(2, 2) != Scalar(0)) m_ /= m_(2, 2);
  }

  static Homography identity(HomographyDirection direction) { return Homography(Matrix::Identity(), direction); }

  [[nodiscard]] const Matrix& matrix() const { return m_; }
  [[nodiscard]] HomographyDirection direction() const { return direction_; }

  [[nodiscard]] Homography inverse() const {
    return Homography(m_.inverse(), direction_ == HomographyDirection::RgbToThermal
                                        ? HomographyDirection::ThermalToRgb
                                        : HomographyDirection::RgbToThermal);
  }

  /// Throws Error(PointAtInfinity) when the homogeneous scale vanishes.
  [[nodiscard]] Point map(const Point& p) const {
    const Eigen::Matrix<Scalar, 3, 1> q = m_ * p.homogeneous();
    if (std::abs(q.z()) < kInfinityTolerance) throw Error(ErrorCode::PointAtInfinity, "point maps to infinity");
    return q.hnormalized();
  }

 private:
  Matrix m_ = Matrix::Identity();
  HomographyDirection direction_ = HomographyDirection::RgbToThermal;
};

using HomographyD = Homography<double>;

[[nodiscard]] inline Eigen::Vector2d map_point(const HomographyD& h, const Eigen::Vector2d& p) { return h.map(p); }

/// Hull of the four mapped corners, clipped to the target image.
/// Throws Error(OutOfView) when nothing of the hull lies inside the target.
[[nodiscard]] BoundingBox map_box(const HomographyD& h, const BoundingBox& box, ImageSize target);

/// Nearest-neighbour inverse warp of both the object and don't-care rasters.
[[nodiscard]] PixelMask map_mask(const HomographyD& h, const PixelMask& mask, ImageSize target);

struct HomographyPair {
  HomographyD rgb_to_thermal;
  HomographyD thermal_to_rgb;
  /// Set when one matrix was missing and derived from the other by inversion.
  std::string warning;
};

inline constexpr const char* kRgbToThermalKey = "homRgbToT";
inline constexpr const char* kThermalToRgbKey = "homTToRgb";

enum class MissingMatrix {
  /// A missing key is an Error(MissingKey).
  Reject,
  /// A single missing matrix is derived by inverting the other one, with a warning.
  DeriveByInversion,
};

/// Reads the two matrices from a matrix-storage YAML document.
[[nodiscard]] HomographyPair load_homographies(const std::filesystem::path& path,
                                              MissingMatrix policy = MissingMatrix::Reject);
[[nodiscard]] HomographyPair parse_homographies(const std::string& text,
                                               MissingMatrix policy = MissingMatrix::Reject);

/// Writes both matrices in the same layout load_homographies reads.
void save_homographies(const std::filesystem::path& path, const HomographyPair& pair);
[[nodiscard]] std::string format_homographies(const HomographyPair& pair);

}  // namespace annotweave
