#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "annotweave/core/error.hpp"
#include "annotweave/exporters/categories.hpp"
#include "annotweave/exporters/exporters.hpp"
#include "annotweave/mask/polygon_raster.hpp"
#include "test_support.hpp"

namespace annotweave {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using testing::decode_runs;
using testing::TempDir;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

Project box_project(std::vector<std::string> frames, ImageSize size = {640, 480}) {
  Project p;
  p.root_dir = fs::temp_directory_path();
  p.frame_files = std::move(frames);
  p.image_size = size;
  return p;
}

AnnotatedObject obj(std::int64_t id, std::string tag, Geometry g) {
  return {ObjectId{id}, std::move(tag), ObjectStatus::Active, {}, std::move(g)};
}

const CategoryList kVehicles{"vehicles", {"person", "car", "bicycle"}};

TEST(Yolo, GoldenLines) {
  EXPECT_EQ(format_yolo_line(0, {0, 0, 640, 480}, {640, 480}), "0 0.500000 0.500000 1.000000 1.000000\n");
  EXPECT_EQ(format_yolo_line(7, {32, 24, 352, 264}, {640, 480}), "7 0.300000 0.300000 0.500000 0.500000\n");
  // Clipped to the image before normalising.
  EXPECT_EQ(format_yolo_line(1, {-64, 0, 64, 480}, {640, 480}), "1 0.050000 0.500000 0.100000 1.000000\n");
}

TEST(Yolo, OneFilePerFrameAndSkippedTags) {
  Project p = box_project({"seq_01.png", "seq_02.png", "seq_03.png"});
  AnnotationStore s = make_store(p);
  s.frames[0].objects = {obj(1, "car", BoundingBox{0, 0, 640, 480}), obj(2, "unicorn", BoundingBox{0, 0, 5, 5}),
                         obj(3, "person", BoundingBox{32, 24, 352, 264})};
  s.frames[2].objects = {obj(1, "bicycle", BoundingBox{700, 0, 800, 10})};
  const auto y = build_yolo(s, p, kVehicles);
  ASSERT_EQ(y.files.size(), 3u);
  EXPECT_EQ(y.files.at("seq_01.txt"), "1 0.500000 0.500000 1.000000 1.000000\n0 0.300000 0.300000 0.500000 0.500000\n");
  EXPECT_EQ(y.files.at("seq_02.txt"), "");
  EXPECT_EQ(y.files.at("seq_03.txt"), "");
  ASSERT_EQ(y.skipped.size(), 2u);
  EXPECT_EQ(y.skipped[0].tag, "unicorn");
  EXPECT_EQ(y.skipped[1].reason, "empty geometry");
  EXPECT_EQ(code_of([&] { (void)build_yolo(s, p, CategoryList{"none", {}}); }), ErrorCode::EmptyCategoryList);

  TempDir out;
  (void)export_yolo(s, p, kVehicles, out.path() / "labels");
  EXPECT_EQ(testing::read_text(out.path() / "labels" / "seq_01.txt"), y.files.at("seq_01.txt"));
}

TEST(Yolo, MaskObjectsUseTightBox) {
  Project p = box_project({"a.png"}, {64, 48});
  p.geometry_kind = GeometryKind::Pixel;
  AnnotationStore s = make_store(p);
  PixelMask m(64, 48);
  m.object.block(12, 16, 12, 16).setOnes();
  s.frames[0].objects = {obj(11, "car", m)};
  EXPECT_EQ(build_yolo(s, p, kVehicles).files.at("a.txt"), "1 0.375000 0.375000 0.250000 0.250000\n");
}

TEST(Rle, KnownEncodings) {
  EXPECT_EQ(rle_encode(Bitmask::Zero(3, 4)).counts, (std::vector<std::uint32_t>{12}));
  EXPECT_EQ(rle_encode(Bitmask::Ones(3, 4)).counts, (std::vector<std::uint32_t>{0, 12}));
  Bitmask m = Bitmask::Zero(2, 3);
  m(1, 0) = 1;  // column-major position 1
  m(0, 1) = 1;  // position 2
  m(1, 2) = 1;  // position 5
  EXPECT_EQ(rle_encode(m).counts, (std::vector<std::uint32_t>{1, 2, 2, 1}));
  EXPECT_EQ(code_of([] { (void)rle_decode(Rle{2, 2, {1, 2}}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { (void)rle_decode(Rle{2, 2, {3, 2}}); }), ErrorCode::InvalidArgument);
}

TEST(Rle, RandomMasksAgainstIndependentDecoder) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + trial % 23, h = 1 + (trial * 5) % 19;
    const Bitmask m = testing::random_noise_mask(rng, w, h, (trial % 10) / 10.0);
    const Rle rle = rle_encode(m);
    const auto decoded = decode_runs(rle.counts, h, w);
    ASSERT_TRUE(decoded.has_value());
    ASSERT_TRUE(raster_equal(*decoded, m));
    ASSERT_TRUE(raster_equal(rle_decode(rle), m));
  }
}

TEST(Coco, PolygonModeDocument) {
  Project p = box_project({"f1.png", "f2.png"}, {100, 80});
  AnnotationStore s = make_store(p);
  s.frames[0].objects = {obj(1, "car", BoundingBox{10, 20, 30, 60}),
                         obj(2, "person", Polygon{{{0, 0}, {8, 0}, {0, 6}}})};
  s.frames[1].objects = {obj(1, "car", BoundingBox{0, 0, 1, 1})};
  const AnnotationStore before = s;
  const auto coco = build_coco(s, p, CocoMaskMode::Polygon);
  EXPECT_EQ(s, before);
  const json& d = coco.document;
  ASSERT_EQ(d.at("images").size(), 2u);
  EXPECT_EQ(d["images"][1]["file_name"], "f2.png");
  EXPECT_EQ(d["images"][0]["width"], 100);
  ASSERT_EQ(d.at("categories").size(), 2u);
  EXPECT_EQ(d["categories"][0]["name"], "car");
  EXPECT_EQ(d["categories"][0]["id"], 1);
  ASSERT_EQ(d.at("annotations").size(), 3u);
  const json& box = d["annotations"][0];
  EXPECT_EQ(box["segmentation"][0], json({10, 20, 30, 20, 30, 60, 10, 60}));
  EXPECT_DOUBLE_EQ(box["area"].get<double>(), 800.0);
  EXPECT_EQ(box["bbox"], json({10, 20, 20, 40}));
  EXPECT_EQ(box["iscrowd"], 0);
  EXPECT_DOUBLE_EQ(d["annotations"][1]["area"].get<double>(), 24.0);
  EXPECT_EQ(d["annotations"][1]["category_id"], 2);
  EXPECT_EQ(d["annotations"][2]["category_id"], 1);
  EXPECT_EQ(d["annotations"][2]["image_id"], 2);
}

TEST(Coco, CategoryListOrdersIdsAndSkipsUnlisted) {
  Project p = box_project({"f1.png"}, {50, 50});
  AnnotationStore s = make_store(p);
  s.frames[0].objects = {obj(1, "bicycle", BoundingBox{1, 1, 5, 5}), obj(2, "unicorn", BoundingBox{1, 1, 5, 5})};
  const auto coco = build_coco(s, p, CocoMaskMode::Rle, &kVehicles);
  EXPECT_EQ(coco.document["categories"].size(), 3u);
  ASSERT_EQ(coco.document["annotations"].size(), 1u);
  EXPECT_EQ(coco.document["annotations"][0]["category_id"], 3);
  ASSERT_EQ(coco.skipped.size(), 1u);
  EXPECT_EQ(coco.skipped[0].tag, "unicorn");
}

// Property: every RLE segmentation decodes with the independent decoder to a mask whose
// popcount is `area` and whose tight box is `bbox`.
TEST(Coco, RleSegmentationsAreSelfConsistent) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int w = 20 + trial, h = 15 + trial % 7;
    Project p = box_project({"f.png"}, {w, h});
    p.geometry_kind = GeometryKind::Pixel;
    AnnotationStore s = make_store(p);
    PixelMask m(testing::random_blobs(rng, w, h, 3, 5));
    m.object(0, 0) = 1;
    s.frames[0].objects = {obj(11, "car", m), obj(12, "car", Polygon{{{1, 1}, {w - 1.0, 2}, {3, h - 1.0}}})};
    for (const auto mode : {CocoMaskMode::Polygon, CocoMaskMode::Rle}) {
      const auto coco = build_coco(s, p, mode);
      for (const auto& ann : coco.document["annotations"]) {
        if (!ann["segmentation"].is_object()) continue;
        const auto& seg = ann["segmentation"];
        ASSERT_EQ(seg["size"], json({h, w}));
        const auto bits = decode_runs(seg["counts"].get<std::vector<std::uint32_t>>(), h, w);
        ASSERT_TRUE(bits.has_value());
        ASSERT_EQ(ann["area"].get<std::int64_t>(), popcount(*bits));
        int lo_x = w, lo_y = h, hi_x = -1, hi_y = -1;
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x)
            if ((*bits)(y, x)) {
              lo_x = std::min(lo_x, x), lo_y = std::min(lo_y, y), hi_x = std::max(hi_x, x), hi_y = std::max(hi_y, y);
            }
        ASSERT_EQ(ann["bbox"], json({lo_x, lo_y, hi_x - lo_x + 1, hi_y - lo_y + 1}));
      }
      const std::size_t rle_count = mode == CocoMaskMode::Rle ? 2 : 1;
      std::size_t seen = 0;
      for (const auto& ann : coco.document["annotations"]) seen += ann["segmentation"].is_object();
      EXPECT_EQ(seen, rle_count);
    }
  }
}

TEST(Coco, ExportWritesParseableFile) {
  TempDir dir;
  Project p = box_project({"f.png"}, {10, 10});
  AnnotationStore s = make_store(p);
  s.frames[0].objects = {obj(1, "car", BoundingBox{1, 1, 4, 4})};
  (void)export_coco(s, p, dir.path() / "coco.json", CocoMaskMode::Rle);
  std::ifstream in(dir.path() / "coco.json");
  const json d = json::parse(in);
  EXPECT_EQ(d["annotations"][0]["area"], 9);
}

TEST(ConvertToBoxes, MasksAndPolygonsBecomeTightBoxes) {
  Project p = box_project({"f.png"}, {20, 20});
  p.geometry_kind = GeometryKind::Pixel;
  AnnotationStore s = make_store(p);
  PixelMask m(20, 20);
  m.object.block(2, 3, 4, 5).setOnes();
  s.frames[0].objects = {obj(11, "car", m), obj(12, "car", Polygon{{{2, 2}, {7, 2}, {7, 7}, {2, 7}}}),
                         obj(13, "car", PixelMask(20, 20))};
  s.frames[0].shared_dontcare = Bitmask::Ones(20, 20);
  const auto conv = convert_pixel_to_box(s, p);
  EXPECT_EQ(conv.project.geometry_kind, GeometryKind::Box);
  ASSERT_EQ(conv.store.frames[0].objects.size(), 2u);
  EXPECT_EQ(std::get<BoundingBox>(conv.store.frames[0].objects[0].geometry), (BoundingBox{3, 2, 8, 6}));
  EXPECT_EQ(std::get<BoundingBox>(conv.store.frames[0].objects[1].geometry), (BoundingBox{2, 2, 7, 7}));
  ASSERT_EQ(conv.dropped.size(), 1u);
  EXPECT_EQ(conv.dropped[0].id, ObjectId{13});
  EXPECT_FALSE(conv.store.frames[0].shared_dontcare.has_value());
}

TEST(Categories, ParseAndLoad) {
  const auto list = parse_category_list("x", "cat\n\n  dog \r\nbird\n");
  EXPECT_EQ(list.entries, (std::vector<std::string>{"cat", "dog", "bird"}));
  EXPECT_EQ(list.index_of("dog"), 1);
  EXPECT_FALSE(list.index_of("Dog").has_value());
  try {
    (void)parse_category_list("x", "cat\ndog\ncat\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateName);
    EXPECT_EQ(e.details(), "line 3");
  }

  const auto shipped = load_category_lists(ANNOTWEAVE_CATEGORY_DIR);
  const CategoryList* voc = shipped.find("pascal_voc");
  ASSERT_NE(voc, nullptr);
  EXPECT_EQ(voc->entries.size(), 20u);
  EXPECT_EQ(voc->entries.front(), "aeroplane");
  ASSERT_NE(shipped.find("mscoco"), nullptr);
  EXPECT_EQ(shipped.find("mscoco")->entries.size(), 80u);

  TempDir dir;
  testing::write_text(dir.path() / "empty.txt", "\n");
  testing::write_text(dir.path() / "b.txt", "one\n");
  testing::write_text(dir.path() / "notes.md", "ignored\n");
  const auto loaded = load_category_lists(dir.path());
  ASSERT_EQ(loaded.lists.size(), 1u);
  EXPECT_EQ(loaded.lists[0].name, "b");
  EXPECT_EQ(loaded.warnings.size(), 1u);
  EXPECT_EQ(code_of([&] { (void)load_category_lists(dir.path() / "absent"); }), ErrorCode::IoFailure);
}

}  // namespace
}  // namespace annotweave
