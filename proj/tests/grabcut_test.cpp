#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "annotweave/core/error.hpp"
#include "annotweave/mask/grabcut.hpp"
#include "test_support.hpp"

namespace annotweave {
namespace {

using testing::iou;

RgbImage square_image(int size, int lo, int hi) {
  RgbImage img(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const bool in = x >= lo && x < hi && y >= lo && y < hi;
      const std::uint8_t v = in ? 255 : 0;
      img.set(x, y, v, v, v);
    }
  return img;
}

Bitmask box_mask(int w, int h, const BoundingBox& b) {
  Bitmask m = empty_mask(w, h);
  m.block(b.ul_y, b.ul_x, b.height(), b.width()).setOnes();
  return m;
}

ErrorCode init_error(const RgbImage& img, const BoundingBox& rect) {
  try {
    (void)grabcut_init(img, rect);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

void expect_monotone(const GrabCutResult& r) {
  for (const auto& e : r.energy_trace) EXPECT_LE(e.after, e.before + 1e-9 * std::abs(e.before));
}

TEST(GrabCutInit, WhiteSquareOnBlack) {
  const RgbImage img = square_image(64, 20, 40);
  const auto r = grabcut_init(img, {15, 15, 45, 45});
  EXPECT_FALSE(r.collapsed);
  EXPECT_GE(iou(r.mask, box_mask(64, 64, {20, 20, 40, 40})), 0.99);
  EXPECT_FALSE(r.energy_trace.empty());
  expect_monotone(r);
  // Nothing outside the rectangle can become foreground.
  EXPECT_FALSE(((r.mask != 0) && (box_mask(64, 64, {15, 15, 45, 45}) == 0)).any());
}

TEST(GrabCutInit, UniformImageCollapsesOrKeepsRect) {
  RgbImage img(40, 40);
  img.pixels.setConstant(128);
  const auto r = grabcut_init(img, {10, 10, 30, 30});
  if (r.collapsed) {
    EXPECT_EQ(popcount(r.mask), 0);
    ASSERT_FALSE(r.warnings.empty());
    EXPECT_NE(r.warnings.front().find("SegmentationCollapsed"), std::string::npos);
  } else {
    EXPECT_TRUE(raster_equal(r.mask, box_mask(40, 40, {10, 10, 30, 30})));
  }
}

TEST(GrabCutInit, RejectsDegenerateRectangles) {
  const RgbImage img = square_image(32, 8, 24);
  EXPECT_EQ(init_error(img, {0, 0, 0, 0}), ErrorCode::DegenerateRect);
  EXPECT_EQ(init_error(img, {5, 5, 6, 8}), ErrorCode::DegenerateRect);  // area 3
  EXPECT_EQ(init_error(img, {-1, 2, 10, 10}), ErrorCode::DegenerateRect);
  EXPECT_EQ(init_error(img, {2, 2, 33, 10}), ErrorCode::DegenerateRect);
  EXPECT_EQ(init_error(img, {0, 0, 32, 32}), ErrorCode::DegenerateRect);
  EXPECT_NO_THROW((void)grabcut_init(img, {5, 5, 7, 7}));  // area exactly 4
}

TEST(GrabCutInit, MixtureModelsAreNormalised) {
  const auto scene = testing::synthetic_scene(3, 77);
  const auto r = grabcut_init(scene.image, scene.rect);
  for (const auto* model : {&r.state.fg_model, &r.state.bg_model}) {
    double total = 0.0;
    for (const auto& c : model->components()) {
      EXPECT_GE(c.weight, 0.0);
      total += c.weight;
      if (c.weight == 0.0) continue;
      EXPECT_TRUE(c.covariance.isApprox(c.covariance.transpose()));
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(c.covariance);
      EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

// The cut must be the exact minimiser: enumerate every labeling of the undecided pixels.
TEST(GrabCutMinCut, EqualsExhaustiveMinimumOnTinyImages) {
  std::mt19937 rng(4);
  std::uniform_int_distribution<int> channel(0, 255);
  for (int trial = 0; trial < 20; ++trial) {
    RgbImage img(6, 5);
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 6; ++x) {
        const bool bright = x >= 2 && x <= 3 && y >= 1 && y <= 3;
        img.set(x, y, static_cast<std::uint8_t>(bright ? 200 + channel(rng) % 56 : channel(rng) % 80),
                static_cast<std::uint8_t>(channel(rng)), static_cast<std::uint8_t>(channel(rng) % 120));
      }
    auto state = grabcut_init(img, {1, 1, 5, 4}, 1).state;
    // Mix in sure labels inside the rectangle.
    state.trimap(1, 1) = TrimapLabel::SureBackground;
    if (trial % 2 == 0) state.trimap(2, 3) = TrimapLabel::SureForeground;
    grabcut_fit_models(state);

    std::vector<std::pair<int, int>> free;
    Bitmask base = empty_mask(6, 5);
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 6; ++x) {
        const auto l = state.trimap(y, x);
        if (!is_sure(l)) free.emplace_back(x, y);
        if (l == TrimapLabel::SureForeground) base(y, x) = 1;
      }
    ASSERT_LE(free.size(), 12u);
    double best = INFINITY;
    for (std::uint32_t bits = 0; bits < (1u << free.size()); ++bits) {
      Bitmask lab = base;
      for (std::size_t k = 0; k < free.size(); ++k) lab(free[k].second, free[k].first) = (bits >> k) & 1u;
      best = std::min(best, grabcut_energy(state, lab));
    }
    const Bitmask cut = grabcut_min_cut(state);
    EXPECT_NEAR(grabcut_energy(state, cut), best, 1e-9 * std::abs(best)) << "trial " << trial;
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 6; ++x) {
        if (state.trimap(y, x) == TrimapLabel::SureForeground) EXPECT_EQ(cut(y, x), 1);
        if (state.trimap(y, x) == TrimapLabel::SureBackground) EXPECT_EQ(cut(y, x), 0);
      }
  }
}

TEST(GrabCutRefine, TruePositiveRecoversMissedRegion) {
  // Bright square with a background-coloured notch that initialisation labels background.
  RgbImage img = square_image(64, 16, 48);
  for (int y = 28; y < 36; ++y)
    for (int x = 16; x < 24; ++x) img.set(x, y, 0, 0, 0);
  const auto init = grabcut_init(img, {12, 12, 52, 52});
  EXPECT_EQ(init.mask(31, 19), 0);

  Brush tp{BrushKind::TruePositive, 2, {}};
  for (int y = 29; y <= 34; y += 2)
    for (int x = 17; x <= 22; x += 2) tp.stroke.emplace_back(x, y);
  const auto refined = grabcut_refine(init.state, {tp});
  const Bitmask foot = brush_footprint(tp, 64, 64);
  EXPECT_FALSE(((foot != 0) && (refined.mask == 0)).any());
  expect_monotone(refined);
}

TEST(GrabCutRefine, EmptyBrushListKeepsSureLabels) {
  const auto scene = testing::synthetic_scene(1, 5);
  const auto init = grabcut_init(scene.image, scene.rect);
  const Brush tp{BrushKind::TruePositive, 1, {{scene.rect.ul_x + 1, scene.rect.ul_y + 1}}};
  const auto once = grabcut_refine(init.state, {tp});
  const auto again = grabcut_refine(once.state, {});
  for (Eigen::Index i = 0; i < again.state.trimap.size(); ++i) {
    const auto l = once.state.trimap.data()[i];
    if (!is_sure(l)) continue;
    EXPECT_EQ(again.state.trimap.data()[i], l);
    EXPECT_EQ(again.mask.data()[i] != 0, l == TrimapLabel::SureForeground);
  }
}

TEST(GrabCutRefine, NegativeBrushOverEverythingCollapses) {
  const RgbImage img = square_image(32, 8, 24);
  const auto init = grabcut_init(img, {5, 5, 27, 27});
  const auto r = grabcut_refine(init.state, {Brush{BrushKind::TrueNegative, 40, {{16, 16}}}});
  EXPECT_TRUE(r.collapsed);
  EXPECT_EQ(popcount(r.mask), 0);
}

TEST(GrabCutRefine, ConflictingStrokesWarnAndLaterWins) {
  const RgbImage img = square_image(32, 8, 24);
  const auto init = grabcut_init(img, {5, 5, 27, 27});
  const auto r = grabcut_refine(init.state, {Brush{BrushKind::TruePositive, 1, {{15, 15}}},
                                             Brush{BrushKind::TrueNegative, 1, {{15, 15}}}});
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings.front().find("ConflictingBrush"), std::string::npos);
  EXPECT_EQ(r.mask(15, 15), 0);
  EXPECT_EQ(r.state.trimap(15, 15), TrimapLabel::SureBackground);
}

TEST(GrabCutRefine, RejectsEditingBrushKinds) {
  const RgbImage img = square_image(32, 8, 24);
  const auto init = grabcut_init(img, {5, 5, 27, 27});
  EXPECT_THROW((void)grabcut_refine(init.state, {Brush{BrushKind::AddToMask, 1, {{3, 3}}}}), Error);
}

// Property: brushed pixels end with the brushed label, on random strokes over random scenes.
TEST(GrabCutRefine, HardConstraintsAlwaysHold) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 12; ++trial) {
    const auto scene = testing::synthetic_scene(trial, 900);
    const auto init = grabcut_init(scene.image, scene.rect, 3);
    std::uniform_int_distribution<int> px(0, scene.image.width - 1), py(0, scene.image.height - 1), pr(1, 4);
    std::vector<Brush> brushes;
    for (int b = 0; b < 4; ++b) {
      Brush br{b % 2 == 0 ? BrushKind::TruePositive : BrushKind::TrueNegative, pr(rng), {}};
      for (int k = 0; k < 3; ++k) br.stroke.emplace_back(px(rng), py(rng));
      brushes.push_back(br);
    }
    const auto r = grabcut_refine(init.state, brushes, 3);
    Bitmask expected = empty_mask(scene.image.width, scene.image.height);
    Bitmask covered = expected;
    for (const auto& b : brushes) {
      const Bitmask foot = brush_footprint(b, scene.image.width, scene.image.height);
      expected = (foot != 0).select(static_cast<std::uint8_t>(b.kind == BrushKind::TruePositive), expected);
      covered = (covered != 0 || foot != 0).cast<std::uint8_t>();
    }
    for (Eigen::Index i = 0; i < covered.size(); ++i) {
      if (covered.data()[i] == 0) continue;
      ASSERT_EQ(r.mask.data()[i], expected.data()[i]) << "trial " << trial;
    }
    expect_monotone(r);
  }
}

}  // namespace
}  // namespace annotweave
