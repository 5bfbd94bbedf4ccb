#include <chrono>
#include <random>

#include <gtest/gtest.h>

#include "annotweave/core/error.hpp"
#include "annotweave/storage/csv.hpp"
#include "annotweave/storage/frames.hpp"
#include "annotweave/storage/png_io.hpp"
#include "annotweave/storage/project_io.hpp"
#include "test_support.hpp"

namespace annotweave {
namespace {

namespace fs = std::filesystem;
using testing::read_text;
using testing::TempDir;
using testing::write_rgb_png;
using testing::write_text;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

std::size_t file_count(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator()));
}

TEST(ScanFrames, NaturalOrderGlobOnly) {
  TempDir dir;
  write_text(dir.path() / "a10.png", "");
  write_text(dir.path() / "a9.png", "");
  write_text(dir.path() / "b.txt", "");
  const auto scan = scan_frames(dir.path(), "*.png");
  EXPECT_EQ(scan.files, (std::vector<std::string>{"a9.png", "a10.png"}));
  EXPECT_TRUE(scan.warnings.empty());
  EXPECT_EQ(scan_frames(dir.path(), "").files.size(), 3u);
}

TEST(ScanFrames, NoMatchesIsAWarning) {
  TempDir dir;
  write_text(dir.path() / "a.png", "");
  const auto scan = scan_frames(dir.path(), "*.jpg");
  EXPECT_TRUE(scan.files.empty());
  ASSERT_EQ(scan.warnings.size(), 1u);
  EXPECT_EQ(scan.warnings[0].rfind("NoMatches", 0), 0u);
}

TEST(ScanFrames, RegexPatternsAndErrors) {
  TempDir dir;
  for (const char* n : {"rgb_001.png", "rgb_002.png", "thermal_001.png", "rgb_x.png"}) write_text(dir.path() / n, "");
  EXPECT_EQ(scan_frames(dir.path(), "re:rgb_\\d+\\.png").files, (std::vector<std::string>{"rgb_001.png", "rgb_002.png"}));
  EXPECT_EQ(scan_frames(dir.path(), "^thermal_.*$").files, (std::vector<std::string>{"thermal_001.png"}));
  EXPECT_EQ(scan_frames(dir.path(), "rgb_00[12].png").files.size(), 2u);
  EXPECT_EQ(scan_frames(dir.path(), "rgb_?.png").files, (std::vector<std::string>{"rgb_x.png"}));
  EXPECT_EQ(code_of([&] { (void)scan_frames(dir.path(), "re:(unclosed"); }), ErrorCode::BadPattern);
  EXPECT_EQ(code_of([&] { (void)scan_frames(dir.path() / "absent", "*"); }), ErrorCode::IoFailure);
}

TEST(NaturalSort, DigitRunsCompareByValue) {
  std::vector<std::string> names = {"f100.png", "f2.png", "f010.png", "f10.png", "e5.png", "f1.png"};
  natural_sort(names);
  EXPECT_EQ(names, (std::vector<std::string>{"e5.png", "f1.png", "f2.png", "f10.png", "f010.png", "f100.png"}));
  EXPECT_FALSE(natural_less("a", "a"));
  EXPECT_TRUE(natural_less("a", "a1"));
}

TEST(Csv, EscapeSplitRoundTrip) {
  const std::vector<std::string> fields = {"plain", "a;b", "say \"hi\"", "", "ünïcode", "x\"\";y"};
  const std::string line = csv::join(fields);
  EXPECT_EQ(csv::split(line, 1), fields);
  EXPECT_EQ(csv::escape("a;b"), "\"a;b\"");
  EXPECT_EQ(csv::escape("q\""), "\"q\"\"\"");
  EXPECT_EQ(code_of([] { (void)csv::split("a;\"open", 7); }), ErrorCode::CorruptCsv);
}

TEST(LoadProject, CorruptLinesReportPosition) {
  TempDir dir;
  write_text(dir.path() / "annotations.csv",
             "frame;id;tag;ul_x;ul_y;lr_x;lr_y;status\nf.png;1;car;0;0;4;4;active\nf.png;2;car;0;zero;4;4;active\n");
  try {
    (void)load_project(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptCsv);
    EXPECT_EQ(e.details(), "line 3 column 5");
  }
  write_text(dir.path() / "annotations.csv", "frame;id;tag;ul_x;ul_y;lr_x;lr_y;status\nf.png;1;car;0;0;4;4\n");
  EXPECT_EQ(code_of([&] { (void)load_project(dir.path()); }), ErrorCode::CorruptCsv);
  write_text(dir.path() / "annotations.csv", "what;is;this\n");
  EXPECT_EQ(code_of([&] { (void)load_project(dir.path()); }), ErrorCode::CorruptCsv);
  write_text(dir.path() / "annotations.csv", "frame;id;tag;ul_x;ul_y;lr_x;lr_y;status\nf.png;1;car;0;0;4;4;maybe\n");
  EXPECT_EQ(code_of([&] { (void)load_project(dir.path()); }), ErrorCode::CorruptCsv);
}

TEST(LoadProject, FreshDirectoryGivesEmptyStore) {
  TempDir dir;
  write_rgb_png(dir.path() / "img_2.png", 8, 6);
  write_rgb_png(dir.path() / "img_10.png", 8, 6);
  const auto loaded = load_project(dir.path());
  EXPECT_EQ(loaded.project.frame_files, (std::vector<std::string>{"img_2.png", "img_10.png"}));
  EXPECT_EQ(loaded.store.size(), 2);
  for (const auto& f : loaded.store.frames) EXPECT_TRUE(f.objects.empty());
  ASSERT_TRUE(loaded.project.image_size.has_value());
  EXPECT_EQ(*loaded.project.image_size, (ImageSize{8, 6}));
  EXPECT_FALSE(loaded.project.dontcare_mask.has_value());
  EXPECT_EQ(loaded.project.geometry_kind, GeometryKind::Box);
  EXPECT_EQ(code_of([&] { (void)load_project(dir.path() / "absent"); }), ErrorCode::IoFailure);
}

TEST(LoadProject, DontCareMaskRootBeforeParent) {
  TempDir dir;
  const fs::path root = dir.path() / "seq";
  fs::create_directories(root);
  write_rgb_png(root / "f1.png", 4, 4);
  GrayImage parent_mask = GrayImage::Zero(4, 4);
  parent_mask(0, 0) = 255;
  write_png_gray(dir.path() / "mask.png", parent_mask);
  auto loaded = load_project(root);
  ASSERT_TRUE(loaded.project.dontcare_mask.has_value());
  EXPECT_EQ(popcount(*loaded.project.dontcare_mask), 1);
  EXPECT_EQ(loaded.project.frame_files, (std::vector<std::string>{"f1.png"}));

  GrayImage root_mask = GrayImage::Zero(4, 4);
  root_mask.block(0, 0, 2, 2).setConstant(1);
  write_png_gray(root / "mask.png", root_mask);
  loaded = load_project(root);
  EXPECT_EQ(popcount(*loaded.project.dontcare_mask), 4);
  EXPECT_EQ(loaded.project.frame_files, (std::vector<std::string>{"f1.png"}));
}

TEST(LoadProject, MissingMaskImageIsAWarning) {
  TempDir dir;
  write_rgb_png(dir.path() / "f1.png", 4, 4);
  write_text(dir.path() / "annotations.csv",
             "frame;mask_file;id;tag;status;polygon\nf1.png;f1_mask.png;11;car;active;\nf1.png;;12;car;active;0,0 3,0 0,3\n");
  const auto loaded = load_project(dir.path());
  EXPECT_EQ(loaded.missing_mask_images, (std::vector<std::string>{"f1_mask.png"}));
  ASSERT_EQ(loaded.store.frames[0].objects.size(), 1u);
  EXPECT_EQ(loaded.store.frames[0].objects[0].id, ObjectId{12});
}

TEST(SaveProject, EmptyStoreWritesHeaderOnly) {
  TempDir dir;
  Project p;
  p.root_dir = dir.path();
  save_project(p, make_store(p));
  EXPECT_EQ(read_text(dir.path() / "annotations.csv"), "frame;id;tag;ul_x;ul_y;lr_x;lr_y;status\n");
  p.geometry_kind = GeometryKind::Pixel;
  save_project(p, make_store(p));
  EXPECT_EQ(read_text(dir.path() / "annotations.csv"), "frame;mask_file;id;tag;status;polygon\n");
}

TEST(SaveProject, MetaColumnsFollowSchemaOrder) {
  TempDir dir;
  Project p;
  p.root_dir = dir.path();
  p.frame_files = {"a.png"};
  p.meta_schema.names = {"Occluded", "Moving North", "Moving South"};
  AnnotationStore s = make_store(p);
  s.frames[0].objects.push_back({ObjectId{3}, "car", ObjectStatus::LastFrameReached,
                                 {{"Occluded", true}, {"Moving North", false}, {"Moving South", true}},
                                 BoundingBox{1, 2, 11, 22}});
  save_project(p, s);
  EXPECT_EQ(read_text(dir.path() / "annotations.csv"),
            "frame;id;tag;ul_x;ul_y;lr_x;lr_y;status;Occluded;Moving North;Moving South\n"
            "a.png;3;car;1;2;10;21;lastframe;1;0;1\n");
  EXPECT_EQ(read_text(dir.path() / "meta_fields.txt"), "Occluded\nMoving North\nMoving South\n");
}

// Property: save -> load restores the project and store; save -> load -> save is byte-identical.
TEST(SaveProject, RandomRoundTrips) {
  std::mt19937 rng(20261016);
  for (int trial = 0; trial < 40; ++trial) {
    TempDir dir;
    const auto kind = trial % 2 == 0 ? GeometryKind::Box : GeometryKind::Pixel;
    const auto rp = testing::random_project(rng, dir.path(), kind);
    save_project(rp.project, rp.store);
    const std::string first = read_text(dir.path() / "annotations.csv");
    const auto loaded = load_project(dir.path());
    EXPECT_TRUE(loaded.warnings.empty()) << loaded.warnings.front();
    ASSERT_EQ(loaded.store, rp.store) << "trial " << trial;
    EXPECT_EQ(loaded.project.frame_files, rp.project.frame_files);
    EXPECT_EQ(loaded.project.meta_schema, rp.project.meta_schema);
    EXPECT_EQ(loaded.project.suggested_tags, rp.project.suggested_tags);
    EXPECT_EQ(loaded.project.dontcare_border_width, rp.project.dontcare_border_width);
    EXPECT_EQ(loaded.project.dontcare_mask.has_value(), rp.project.dontcare_mask.has_value());
    if (rp.project.dontcare_mask) EXPECT_TRUE(raster_equal(*loaded.project.dontcare_mask, *rp.project.dontcare_mask));
    save_project(loaded.project, loaded.store);
    ASSERT_EQ(read_text(dir.path() / "annotations.csv"), first);
  }
}

TEST(SaveProject, RemovesStaleMaskImage) {
  TempDir dir;
  Project p;
  p.root_dir = dir.path();
  p.geometry_kind = GeometryKind::Pixel;
  p.frame_files = {"a.png"};
  AnnotationStore s = make_store(p);
  PixelMask m(4, 4);
  m.object(1, 1) = 1;
  s.frames[0].objects.push_back({ObjectId{11}, "x", ObjectStatus::Active, {}, m});
  save_project(p, s);
  EXPECT_TRUE(fs::exists(dir.path() / "a_mask.png"));
  s.frames[0].objects.clear();
  save_project(p, s);
  EXPECT_FALSE(fs::exists(dir.path() / "a_mask.png"));
}

TEST(Backup, OnePerOpenNoneWithoutCsvAndSuffixOnCollision) {
  TempDir dir;
  EXPECT_FALSE(backup_annotations(dir.path()).has_value());
  (void)open_project(dir.path());
  EXPECT_EQ(file_count(dir.path() / "backup"), 0u);

  write_text(dir.path() / "annotations.csv", "frame;id;tag;ul_x;ul_y;lr_x;lr_y;status\n");
  const auto now = std::chrono::system_clock::now();
  const auto a = backup_annotations(dir.path(), now);
  const auto b = backup_annotations(dir.path(), now);
  ASSERT_TRUE(a && b);
  EXPECT_NE(*a, *b);
  EXPECT_EQ(b->filename().string().substr(b->filename().string().size() - 6), "-2.csv");
  EXPECT_EQ(read_text(*a), read_text(dir.path() / "annotations.csv"));
  for (int k = 0; k < 3; ++k) {
    const std::size_t before = file_count(dir.path() / "backup");
    (void)open_project(dir.path());
    EXPECT_EQ(file_count(dir.path() / "backup"), before + 1);
  }
}

TEST(Settings, TagSuggestionsAndEdits) {
  TempDir dir;
  Project p;
  p.root_dir = dir.path();
  p.frame_files = {"a.png"};
  p.suggested_tags = {"person"};
  AnnotationStore s = make_store(p);
  s.frames[0].objects.push_back({ObjectId{1}, "car", ObjectStatus::Active, {}, BoundingBox{0, 0, 1, 1}});
  EXPECT_EQ(tag_suggestions(p, s), (std::vector<std::string>{"person", "car"}));
  p = edit_suggested_tags(p, {"person", "pedestrian"});
  EXPECT_EQ(read_text(dir.path() / "suggested_tags.txt"), "person\npedestrian\n");
  EXPECT_EQ(tag_suggestions(p, s), (std::vector<std::string>{"person", "pedestrian", "car"}));
  EXPECT_EQ(code_of([&] { (void)replace_suggested_tags(p, {"a", "a"}); }), ErrorCode::DuplicateName);
  EXPECT_EQ(code_of([&] { (void)replace_suggested_tags(p, {""}); }), ErrorCode::InvalidArgument);
}

TEST(Settings, MetaSchemaRemovalNeedsConfirmation) {
  TempDir dir;
  Project p;
  p.root_dir = dir.path();
  p.frame_files = {"a.png"};
  p.meta_schema.names = {"Occluded", "Moving North"};
  AnnotationStore s = make_store(p);
  s.frames[0].objects.push_back({ObjectId{1}, "car", ObjectStatus::Active,
                                 {{"Occluded", true}, {"Moving North", false}}, BoundingBox{0, 0, 1, 1}});
  try {
    (void)edit_meta_schema(p, s, {"Moving North"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FieldInUse);
    EXPECT_EQ(e.details(), "Occluded");
  }
  EXPECT_FALSE(fs::exists(dir.path() / "meta_fields.txt"));
  // Unused fields go without confirmation; new fields default to false.
  auto edit = edit_meta_schema(p, s, {"Occluded", "Parked"});
  EXPECT_FALSE(edit.store.frames[0].objects[0].meta.contains("Moving North"));
  EXPECT_FALSE(edit.store.frames[0].objects[0].meta.at("Parked"));
  edit = edit_meta_schema(p, s, {}, true);
  EXPECT_TRUE(edit.store.frames[0].objects[0].meta.empty());
  EXPECT_EQ(read_text(dir.path() / "meta_fields.txt"), "");
  EXPECT_EQ(code_of([&] { (void)replace_meta_schema(p, s, {"status"}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(fields_in_use(s, {"Occluded", "Moving North"}), (std::vector<std::string>{"Occluded"}));
}

TEST(ProjectLock, SecondWriterIsRejectedUntilRelease) {
  TempDir dir;
  {
    ProjectLock first(dir.path());
    EXPECT_EQ(code_of([&] { ProjectLock second(dir.path()); }), ErrorCode::Locked);
  }
  EXPECT_NO_THROW(ProjectLock again(dir.path()));
  // A lock left by a process that no longer exists is reclaimed.
  write_text(dir.path() / ".annotweave.lock", "999999999\n");
  EXPECT_NO_THROW(ProjectLock reclaimed(dir.path()));
}

TEST(PngIo, RoundTripsAndDownscale) {
  TempDir dir;
  GrayImage g(3, 5);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = static_cast<std::uint8_t>(i * 17);
  write_png_gray(dir.path() / "g.png", g);
  EXPECT_TRUE((read_png_gray(dir.path() / "g.png") == g).all());
  EXPECT_EQ(read_png_size(dir.path() / "g.png"), (ImageSize{5, 3}));

  RgbImage img(7, 4);
  img.set(6, 3, 1, 2, 3);
  const RgbImage back = decode_png_rgb(encode_png_rgb(img));
  EXPECT_EQ(back.width, 7);
  EXPECT_TRUE((back.pixels == img.pixels).all());

  RgbImage big(400, 100);
  big.pixels.setConstant(90);
  const RgbImage small = downscale(big, 100);
  EXPECT_EQ(small.width, 100);
  EXPECT_EQ(small.height, 25);
  EXPECT_TRUE((small.pixels == 90).all());
  EXPECT_EQ(code_of([&] { (void)read_png_gray(dir.path() / "absent.png"); }), ErrorCode::IoFailure);
}

}  // namespace
}  // namespace annotweave
