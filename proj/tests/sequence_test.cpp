#include <random>

#include <gtest/gtest.h>

#include "annotweave/core/error.hpp"
#include "annotweave/sequence/sequence.hpp"
#include "test_support.hpp"

namespace annotweave {
namespace {

using testing::round_half_up;

AnnotationStore blank_store(int frames) {
  AnnotationStore s;
  for (int i = 0; i < frames; ++i) s.frames.push_back({i, "f" + std::to_string(i) + ".png", {}, std::nullopt});
  return s;
}

AnnotatedObject box_object(std::int64_t id, BoundingBox b, ObjectStatus status = ObjectStatus::Active) {
  return {ObjectId{id}, "car", status, {{"Occluded", false}}, b};
}

void put(AnnotationStore& s, int frame, const AnnotatedObject& o) { s.frames[frame].objects.push_back(o); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

TEST(Retain, CopiesActiveObjectsOnly) {
  AnnotationStore s = blank_store(3);
  put(s, 0, box_object(1, {0, 0, 5, 5}));
  put(s, 0, box_object(2, {5, 5, 9, 9}, ObjectStatus::LastFrameReached));
  const AnnotationStore out = retain(s, 0, 1);
  ASSERT_EQ(out.frames[1].objects.size(), 1u);
  EXPECT_EQ(out.frames[1].objects[0], s.frames[0].objects[0]);
  EXPECT_EQ(out.frames[0], s.frames[0]);
  EXPECT_EQ(out.frames[2], s.frames[2]);
}

TEST(Retain, BackwardCopyAndTargetVersionPreserved) {
  AnnotationStore s = blank_store(3);
  put(s, 2, box_object(1, {0, 0, 5, 5}));
  put(s, 2, box_object(3, {1, 1, 2, 2}));
  put(s, 1, box_object(1, {10, 10, 20, 20}));
  const AnnotationStore out = retain(s, 2, 1);
  ASSERT_EQ(out.frames[1].objects.size(), 2u);
  EXPECT_EQ(std::get<BoundingBox>(out.frames[1].find(ObjectId{1})->geometry), (BoundingBox{10, 10, 20, 20}));
  EXPECT_NE(out.frames[1].find(ObjectId{3}), nullptr);
}

TEST(Retain, EmptySourceLeavesTargetAlone) {
  AnnotationStore s = blank_store(2);
  put(s, 1, box_object(4, {0, 0, 3, 3}));
  EXPECT_EQ(retain(s, 0, 1), s);
}

TEST(Retain, RequiresAdjacentInRangeFrames) {
  AnnotationStore s = blank_store(4);
  EXPECT_EQ(code_of([&] { (void)retain(s, 0, 2); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { (void)retain(s, 3, 4); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { (void)retain(s, 1, 1); }), ErrorCode::InvalidArgument);
}

TEST(Retain, Idempotent) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    AnnotationStore s = blank_store(2);
    for (int k = 0; k < 6; ++k) {
      if (rng() % 2) put(s, 0, box_object(k, {k, k, k + 3, k + 3}, rng() % 3 ? ObjectStatus::Active : ObjectStatus::LastFrameReached));
      if (rng() % 3 == 0) put(s, 1, box_object(k, {0, 0, 2, 2}));
    }
    const AnnotationStore once = retain(s, 0, 1);
    EXPECT_EQ(retain(once, 0, 1), once);
  }
}

TEST(Interpolate, FillsEveryIntermediateFrame) {
  AnnotationStore s = blank_store(8);
  put(s, 1, box_object(5, {10, 10, 50, 50}));
  put(s, 6, box_object(5, {60, 60, 100, 100}));
  const AnnotationStore out = interpolate(s, ObjectId{5}, 1, 6);
  for (int f = 2; f <= 5; ++f) ASSERT_NE(out.frames[f].find(ObjectId{5}), nullptr) << f;
  EXPECT_EQ(std::get<BoundingBox>(out.frames[3].find(ObjectId{5})->geometry), (BoundingBox{30, 30, 70, 70}));
  EXPECT_EQ(out.frames[1], s.frames[1]);
  EXPECT_EQ(out.frames[6], s.frames[6]);
  EXPECT_EQ(out.frames[0], s.frames[0]);
  EXPECT_EQ(out.frames[7], s.frames[7]);
}

TEST(Interpolate, IdenticalKeyframesGiveConstantBoxes) {
  AnnotationStore s = blank_store(5);
  put(s, 0, box_object(11, {3, 4, 9, 12}));
  put(s, 4, box_object(11, {3, 4, 9, 12}));
  const AnnotationStore out = interpolate(s, ObjectId{11}, 0, 4);
  for (int f = 1; f < 4; ++f) EXPECT_EQ(out.frames[f].objects.at(0), s.frames[0].objects[0]);
}

TEST(Interpolate, OverwritesIntermediatesAndCopiesStartAttributes) {
  AnnotationStore s = blank_store(4);
  AnnotatedObject start = box_object(2, {0, 0, 10, 10});
  start.meta["Occluded"] = true;
  start.tag = "bus";
  put(s, 0, start);
  put(s, 1, box_object(2, {90, 90, 99, 99}));
  put(s, 3, box_object(2, {3, 3, 13, 13}));
  const AnnotationStore out = interpolate(s, ObjectId{2}, 0, 3);
  const auto& mid = *out.frames[1].find(ObjectId{2});
  EXPECT_EQ(std::get<BoundingBox>(mid.geometry), (BoundingBox{1, 1, 11, 11}));
  EXPECT_EQ(mid.tag, "bus");
  EXPECT_TRUE(mid.meta.at("Occluded"));
  EXPECT_EQ(out.frames[1].objects.size(), 1u);
}

TEST(Interpolate, Errors) {
  AnnotationStore s = blank_store(6);
  put(s, 0, box_object(1, {0, 0, 4, 4}));
  EXPECT_EQ(code_of([&] { (void)interpolate(s, ObjectId{1}, 0, 5); }), ErrorCode::MissingKeyframe);
  AnnotatedObject poly{ObjectId{1}, "car", ObjectStatus::Active, {}, Polygon{{{0, 0}, {4, 0}, {0, 4}}}};
  put(s, 5, poly);
  EXPECT_EQ(code_of([&] { (void)interpolate(s, ObjectId{1}, 0, 5); }), ErrorCode::NotBoxGeometry);
  EXPECT_EQ(code_of([&] { (void)interpolate(s, ObjectId{1}, 0, 1); }), ErrorCode::InvalidArgument);
}

// Rational oracle: corner = a + (b - a) * k / n, rounded half-up by floor division.
TEST(Interpolate, MatchesRationalBlendOnRandomPairs) {
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> coord(-50, 700), len(1, 300), span(2, 17);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = span(rng);
    AnnotationStore s = blank_store(n + 1);
    const int ax = coord(rng), ay = coord(rng), bx = coord(rng), by = coord(rng);
    const BoundingBox a{ax, ay, ax + len(rng), ay + len(rng)};
    const BoundingBox b{bx, by, bx + len(rng), by + len(rng)};
    put(s, 0, box_object(9, a));
    put(s, n, box_object(9, b));
    const AnnotationStore out = interpolate(s, ObjectId{9}, 0, n);
    for (int k = 1; k < n; ++k) {
      auto blend = [&](int p, int q) {
        return static_cast<int>(round_half_up(std::int64_t{p} * n + std::int64_t{q - p} * k, n));
      };
      const BoundingBox expected{blend(a.ul_x, b.ul_x), blend(a.ul_y, b.ul_y), blend(a.lr_x, b.lr_x),
                                 blend(a.lr_y, b.lr_y)};
      ASSERT_EQ(std::get<BoundingBox>(out.frames[k].find(ObjectId{9})->geometry), expected);
      if (k > 1 && a.ul_x <= b.ul_x) {
        ASSERT_LE(std::get<BoundingBox>(out.frames[k - 1].find(ObjectId{9})->geometry).ul_x, expected.ul_x);
      }
    }
  }
}

TEST(DeleteForward, RemovesFromStartFrameOnward) {
  AnnotationStore s = blank_store(12);
  for (int f = 3; f <= 10; ++f) put(s, f, box_object(4, {0, 0, 2, 2}));
  put(s, 6, box_object(5, {0, 0, 2, 2}));
  const ChangeReport plan = plan_delete_forward(s, {ObjectId{4}}, 5);
  const auto r = delete_forward(s, {ObjectId{4}}, 5);
  EXPECT_EQ(r.report.size(), 6u);
  EXPECT_EQ(plan, r.report);
  for (int f = 0; f < 12; ++f) EXPECT_EQ(r.store.frames[f].find(ObjectId{4}) != nullptr, f == 3 || f == 4) << f;
  EXPECT_NE(r.store.frames[6].find(ObjectId{5}), nullptr);
}

TEST(DeleteForward, LastFrameAndAbsentId) {
  AnnotationStore s = blank_store(4);
  for (int f = 0; f < 4; ++f) put(s, f, box_object(4, {0, 0, 2, 2}));
  const auto last = delete_forward(s, {ObjectId{4}}, 3);
  ASSERT_EQ(last.report.size(), 1u);
  EXPECT_EQ(last.report[0].frame, 3);
  const auto none = delete_forward(s, {ObjectId{77}}, 0);
  EXPECT_TRUE(none.report.empty());
  EXPECT_EQ(none.store, s);
}

TEST(MergeForward, RelabelsAndUnions) {
  AnnotationStore s = blank_store(10);
  for (int f = 4; f <= 8; ++f) put(s, f, box_object(2, {20, 20, 30, 30}));
  for (int f = 4; f <= 6; ++f) put(s, f, box_object(1, {0, 0, 10, 10}));
  const auto r = merge_forward(s, ObjectId{1}, ObjectId{2}, 4);
  ASSERT_EQ(r.report.size(), 5u);
  for (const auto& e : r.report) {
    EXPECT_EQ(e.kind, e.frame <= 6 ? ChangeKind::Merged : ChangeKind::Relabeled);
  }
  for (int f = 4; f <= 8; ++f) {
    EXPECT_EQ(r.store.frames[f].find(ObjectId{2}), nullptr);
    const auto expected = f <= 6 ? BoundingBox{0, 0, 30, 30} : BoundingBox{20, 20, 30, 30};
    EXPECT_EQ(std::get<BoundingBox>(r.store.frames[f].find(ObjectId{1})->geometry), expected);
  }
}

TEST(MergeForward, MasksUnionBitwise) {
  AnnotationStore s = blank_store(1);
  PixelMask a(8, 8), b(8, 8);
  a.object(1, 1) = 1;
  a.dontcare(2, 2) = 1;
  b.object(2, 2) = 1;
  put(s, 0, {ObjectId{11}, "x", ObjectStatus::Active, {}, a});
  put(s, 0, {ObjectId{12}, "x", ObjectStatus::Active, {}, b});
  const auto r = merge_forward(s, ObjectId{11}, ObjectId{12}, 0);
  const auto& m = std::get<PixelMask>(r.store.frames[0].find(ObjectId{11})->geometry);
  EXPECT_EQ(popcount(m.object), 2);
  EXPECT_EQ(popcount(m.dontcare), 0);
}

TEST(MergeForward, NoOpsAndErrors) {
  AnnotationStore s = blank_store(3);
  put(s, 1, box_object(1, {0, 0, 4, 4}));
  put(s, 1, box_object(2, {0, 0, 4, 4}));
  const auto absent = merge_forward(s, ObjectId{1}, ObjectId{9}, 0);
  EXPECT_TRUE(absent.report.empty());
  EXPECT_EQ(absent.store, s);
  const auto same_box = merge_forward(s, ObjectId{1}, ObjectId{2}, 0);
  EXPECT_EQ(std::get<BoundingBox>(same_box.store.frames[1].find(ObjectId{1})->geometry), (BoundingBox{0, 0, 4, 4}));
  EXPECT_EQ(code_of([&] { (void)merge_forward(s, ObjectId{1}, ObjectId{1}, 0); }), ErrorCode::SameId);
}

TEST(HistoryWindow, SlotsAndGaps) {
  AnnotationStore s = blank_store(20);
  for (int f = 0; f < 20; ++f) {
    if (f != 7) put(s, f, box_object(3, {f, f, f + 5, f + 5}));
  }
  const auto full = history_window(s, ObjectId{3}, 13);
  ASSERT_EQ(full.size(), 11u);
  for (int k = 0; k < 11; ++k) {
    ASSERT_TRUE(full[k].has_value());
    EXPECT_EQ(full[k]->frame, 8 + k);
    EXPECT_EQ(full[k]->box, (BoundingBox{8 + k, 8 + k, 13 + k, 13 + k}));
  }
  const auto edge = history_window(s, ObjectId{3}, 0);
  for (int k = 0; k < 5; ++k) EXPECT_FALSE(edge[k].has_value());
  for (int k = 5; k < 11; ++k) EXPECT_TRUE(edge[k].has_value());
  const auto gap = history_window(s, ObjectId{3}, 7);
  for (int k = 0; k < 11; ++k) EXPECT_EQ(gap[k].has_value(), k != 5);
}

TEST(HistoryWindow, MaskBoundsAreTight) {
  AnnotationStore s = blank_store(1);
  PixelMask m(10, 10);
  m.object.block(2, 3, 4, 2).setOnes();
  put(s, 0, {ObjectId{20}, "x", ObjectStatus::Active, {}, m});
  const auto w = history_window(s, ObjectId{20}, 0, 1);
  ASSERT_TRUE(w[1].has_value());
  EXPECT_EQ(w[1]->box, (BoundingBox{3, 2, 5, 6}));
}

}  // namespace
}  // namespace annotweave
