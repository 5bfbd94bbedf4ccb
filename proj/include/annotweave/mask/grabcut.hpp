#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "annotweave/core/model.hpp"
#include "annotweave/mask/brush.hpp"
#include "annotweave/mask/gmm.hpp"

namespace annotweave {

enum class TrimapLabel : std::uint8_t {
  SureBackground = 0,
  SureForeground = 1,
  ProbableBackground = 2,
  ProbableForeground = 3,
};

[[nodiscard]] constexpr bool is_foreground(TrimapLabel l) {
  return l == TrimapLabel::SureForeground || l == TrimapLabel::ProbableForeground;
}
[[nodiscard]] constexpr bool is_sure(TrimapLabel l) {
  return l == TrimapLabel::SureForeground || l == TrimapLabel::SureBackground;
}

using Trimap = Raster<TrimapLabel>;

struct GrabCutParams {
  int components = 5;
  double gamma = 50.0;
  double covariance_regularization = 1e-5;
  /// Segmentation runs on the box around all non-background trimap pixels grown by this margin.
  int crop_padding = 20;
};

inline constexpr int kDefaultGrabCutIterations = 5;

struct GrabCutState {
  RgbImage image;
  Trimap trimap;
  GaussianMixture fg_model;
  GaussianMixture bg_model;
  GrabCutParams params;

  [[nodiscard]] BoundingBox working_region() const;
  /// Foreground bits implied by the current trimap.
  [[nodiscard]] Bitmask labeling() const;
};

/// Total energy of one cut, evaluated with the mixtures that produced it.
struct CutEnergy {
  double before = 0.0;
  double after = 0.0;
};

struct GrabCutResult {
  Bitmask mask;
  GrabCutState state;
  /// No foreground pixel survived; `mask` is empty.
  bool collapsed = false;
  std::vector<std::string> warnings;
  std::vector<CutEnergy> energy_trace;
};

/// Rectangle-seeded segmentation. Throws Error(DegenerateRect) for rects with
/// area < 4 or not strictly inside the image.
[[nodiscard]] GrabCutResult grabcut_init(const RgbImage& image, const BoundingBox& rect,
                                         int iterations = kDefaultGrabCutIterations, const GrabCutParams& params = {});

/// Applies TruePositive / TrueNegative strokes as hard constraints and re-runs refinement.
/// When a pixel receives both kinds in one call the later stroke wins and a ConflictingBrush warning is emitted.
[[nodiscard]] GrabCutResult grabcut_refine(GrabCutState state, const std::vector<Brush>& brushes,
                                           int iterations = kDefaultGrabCutIterations);

/// Reassigns mixture components and refits both models from the current trimap.
void grabcut_fit_models(GrabCutState& state);

/// Data + smoothness energy of `labeling` under the state's current (frozen) models,
/// restricted to the working region.
[[nodiscard]] double grabcut_energy(const GrabCutState& state, const Bitmask& labeling);

/// Exact minimiser of grabcut_energy over labelings that respect the sure labels.
[[nodiscard]] Bitmask grabcut_min_cut(const GrabCutState& state);

}  // namespace annotweave
