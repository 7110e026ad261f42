#include <doctest.h>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "taillight/dataset.hpp"
#include "taillight/image_io.hpp"

using namespace taillight;
using namespace taillight::data;

namespace {

AnnotatedFrame make_frame(int w, int h, BehaviorClass label,
                          const std::string& id) {
  AnnotatedFrame f;
  f.image = Image8(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        f.image.at(x, y, c) = static_cast<std::uint8_t>((x * 7 + y * 13 + c) % 256);
  f.box = {0.5, 0.5, 1.0, 1.0};
  f.label = label;
  f.source_id = id;
  return f;
}

}  // namespace

TEST_CASE("annotation parsing") {
  SUBCASE("standard line denormalizes to the expected pixel box") {
    const auto [cid, box] = parse_annotation("0 0.5 0.5 0.2 0.1", 100, 100);
    CHECK(cid == 0);
    const auto r = denormalize_box(box, 100, 100);
    CHECK(r.width() == 20);
    CHECK(r.height() == 10);
    CHECK(r.x0 == 40);  // center (50,50)
    CHECK(r.y0 == 45);
  }
  SUBCASE("box at the edge clamps inside the raster") {
    const auto [cid, box] = parse_annotation("3 1.0 0.5 0.4 0.2", 200, 100);
    CHECK(cid == 3);
    const auto r = denormalize_box(box, 200, 100);
    CHECK(r.x1 <= 200);
    CHECK(r.x0 >= 0);
    CHECK(r.width() == 40);  // half of the 80 px box survives the clamp
  }
  SUBCASE("rejections") {
    CHECK_THROWS_WITH_AS(parse_annotation("4 0.5 0.5 0.2 0.1", 10, 10),
                         doctest::Contains("class id out of range"), DataError);
    CHECK_THROWS_AS(parse_annotation("0 0.5 0.5 0.2", 10, 10), DataError);
    CHECK_THROWS_AS(parse_annotation("0 0.5 0.5 0.2 0.1 9", 10, 10), DataError);
    CHECK_THROWS_AS(parse_annotation("0 x 0.5 0.2 0.1", 10, 10), DataError);
    CHECK_THROWS_AS(parse_annotation("0 1.5 0.5 0.2 0.1", 10, 10), DataError);
    CHECK_THROWS_AS(parse_annotation("0 0.5 0.5 0 0.1", 10, 10), DataError);
  }
  SUBCASE("serialize/parse round trip is exact") {
    const BoundingBox box{0.123456789012345, 0.5, 0.25, 0.0625};
    const std::string line = serialize_annotation(2, box);
    const auto [cid, back] = parse_annotation(line, 640, 480);
    CHECK(cid == 2);
    CHECK(std::abs(back.cx - box.cx) < 1e-9);
    CHECK(std::abs(back.cy - box.cy) < 1e-9);
    CHECK(std::abs(back.w - box.w) < 1e-9);
    CHECK(std::abs(back.h - box.h) < 1e-9);
  }
}

TEST_CASE("class id mapping is the fixed bijection") {
  CHECK(std::string(class_name(BehaviorClass::braking)) == "braking");
  CHECK(std::string(class_name(BehaviorClass::running)) == "running");
  CHECK(std::string(class_name(BehaviorClass::left_turn)) == "left_turn");
  CHECK(std::string(class_name(BehaviorClass::right_turn)) == "right_turn");
  for (int i = 0; i < 4; ++i)
    CHECK(static_cast<int>(class_from_id(i)) == i);
  CHECK_THROWS_AS(class_from_id(4), DataError);
  CHECK_THROWS_AS(class_from_id(-1), DataError);
}

TEST_CASE("roi cropping") {
  SUBCASE("full-image box is an identity crop") {
    const auto frame = make_frame(8, 6, BehaviorClass::braking, "a");
    const auto roi = crop_roi(frame);
    CHECK(roi.image.width == 8);
    CHECK(roi.image.height == 6);
    CHECK(roi.image.pixels == frame.image.pixels);
    CHECK(roi.prov.origin == "clean");
  }
  SUBCASE("quarter box on 8x8 crops rows 0..3, cols 0..3") {
    auto frame = make_frame(8, 8, BehaviorClass::running, "b");
    frame.box = {0.25, 0.25, 0.5, 0.5};
    const auto roi = crop_roi(frame);
    REQUIRE(roi.image.width == 4);
    REQUIRE(roi.image.height == 4);
    // index-arithmetic oracle: output (x,y) must equal source (x,y)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x)
        for (int c = 0; c < 3; ++c)
          CHECK(roi.image.at(x, y, c) == frame.image.at(x, y, c));
  }
  SUBCASE("box past the right edge clamps without padding") {
    auto frame = make_frame(10, 10, BehaviorClass::running, "c");
    frame.box = {1.0, 0.5, 0.4, 0.4};
    const auto roi = crop_roi(frame);
    CHECK(roi.image.width == 2);  // [8,12) clamps to [8,10)
    CHECK(roi.image.height == 4);
    for (int y = 0; y < roi.image.height; ++y)
      for (int x = 0; x < roi.image.width; ++x)
        CHECK(roi.image.at(x, y, 0) == frame.image.at(8 + x, 3 + y, 0));
  }
  SUBCASE("degenerate box is an error") {
    auto frame = make_frame(10, 10, BehaviorClass::running, "d");
    frame.box = {1.0, 0.5, 0.01, 0.4};  // 1 px wide, centered on the edge
    CHECK_THROWS_AS(crop_roi(frame), DataError);
  }
}

TEST_CASE("dataset splitting") {
  auto build = [](int per_class) {
    std::vector<AnnotatedFrame> frames;
    for (int c = 0; c < 4; ++c)
      for (int i = 0; i < per_class; ++i)
        frames.push_back(make_frame(4, 4, class_from_id(c),
                                    "f" + std::to_string(c) + "_" +
                                        std::to_string(i)));
    return frames;
  };

  SUBCASE("100 frames at 60/15/25 split exactly") {
    const auto split = split_dataset(build(25), {0.60, 0.15, 0.25}, 7);
    CHECK(split.train.size() == 60);
    CHECK(split.validation.size() == 15);
    CHECK(split.test.size() == 25);
  }
  SUBCASE("same seed twice gives identical membership") {
    const auto a = split_dataset(build(25), {0.60, 0.15, 0.25}, 99);
    const auto b = split_dataset(build(25), {0.60, 0.15, 0.25}, 99);
    auto ids = [](const std::vector<AnnotatedFrame>& v) {
      std::vector<std::string> out;
      for (const auto& f : v) out.push_back(f.source_id);
      return out;
    };
    CHECK(ids(a.train) == ids(b.train));
    CHECK(ids(a.validation) == ids(b.validation));
    CHECK(ids(a.test) == ids(b.test));
  }
  SUBCASE("splits are disjoint and cover the input") {
    const auto split = split_dataset(build(13), {0.60, 0.15, 0.25}, 3);
    std::set<std::string> seen;
    std::size_t total = 0;
    for (const auto* part : {&split.train, &split.validation, &split.test})
      for (const auto& f : *part) {
        CHECK(seen.insert(f.source_id).second);
        ++total;
      }
    CHECK(total == 52);
  }
  SUBCASE("stratification keeps per-class balance within one") {
    const auto split = split_dataset(build(20), {0.60, 0.15, 0.25}, 11);
    auto count = [](const std::vector<AnnotatedFrame>& v, int cls) {
      return std::count_if(v.begin(), v.end(), [cls](const auto& f) {
        return static_cast<int>(f.label) == cls;
      });
    };
    for (int c = 0; c < 4; ++c) {
      CHECK(std::abs(count(split.train, c) - 12) <= 1);
      CHECK(std::abs(count(split.validation, c) - 3) <= 1);
      CHECK(std::abs(count(split.test, c) - 5) <= 1);
    }
  }
  SUBCASE("overrides pin frames to their split") {
    std::map<std::string, SplitName> overrides{
        {"f0_0", SplitName::test}, {"f1_0", SplitName::validation}};
    const auto split =
        split_dataset(build(5), {0.60, 0.15, 0.25}, 3, overrides);
    auto has = [](const std::vector<AnnotatedFrame>& v, const std::string& id) {
      return std::any_of(v.begin(), v.end(),
                         [&](const auto& f) { return f.source_id == id; });
    };
    CHECK(has(split.test, "f0_0"));
    CHECK(has(split.validation, "f1_0"));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(split_dataset({}, {0.6, 0.15, 0.25}, 1), DataError);
    CHECK_THROWS_AS(split_dataset(build(2), {0.5, 0.15, 0.25}, 1), DataError);
  }
}

TEST_CASE("grayscale images are promoted by channel replication") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "taillight_gray.png";
  {
    // Single-channel PNG written through OpenCV directly.
    cv::Mat gray(5, 7, CV_8UC1);
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 7; ++x)
        gray.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(10 * y + x);
    cv::imwrite(path.string(), gray);
  }
  const Image8 img = load_image(path);
  REQUIRE(img.width == 7);
  REQUIRE(img.height == 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) {
      CHECK(img.at(x, y, 0) == 10 * y + x);
      CHECK(img.at(x, y, 1) == img.at(x, y, 0));
      CHECK(img.at(x, y, 2) == img.at(x, y, 0));
    }
  fs::remove(path);
}

TEST_CASE("directory round trip") {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / "taillight_test_dataset_dir";
  fs::remove_all(dir);

  std::vector<AnnotatedFrame> frames;
  for (int c = 0; c < 4; ++c)
    frames.push_back(make_frame(12, 9, class_from_id(c),
                                "img" + std::to_string(c)));
  frames[1].box = {0.5, 0.5, 0.5, 0.5};
  save_dataset_dir(dir, frames);

  const auto loaded = load_dataset_dir(dir / "images", dir / "labels");
  REQUIRE(loaded.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(loaded[i].image.pixels == frames[i].image.pixels);  // png lossless
    CHECK(loaded[i].label == frames[i].label);
    CHECK(std::abs(loaded[i].box.w - frames[i].box.w) < 1e-9);
  }

  SUBCASE("missing label file is an error") {
    fs::remove(dir / "labels" / "img2.txt");
    CHECK_THROWS_AS(load_dataset_dir(dir / "images", dir / "labels"),
                    DataError);
  }
  SUBCASE("multi-box label files are rejected") {
    std::ofstream out(dir / "labels" / "img0.txt");
    out << "0 0.5 0.5 1 1\n1 0.5 0.5 0.5 0.5\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_dataset_dir(dir / "images", dir / "labels"),
                         doctest::Contains("more than one box"), DataError);
  }
  fs::remove_all(dir);
}
