#include "taillight/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "taillight/image_io.hpp"
#include "taillight/rng.hpp"

namespace taillight::data {

const char* class_name(BehaviorClass c) {
  switch (c) {
    case BehaviorClass::braking: return "braking";
    case BehaviorClass::running: return "running";
    case BehaviorClass::left_turn: return "left_turn";
    case BehaviorClass::right_turn: return "right_turn";
  }
  throw DataError("invalid behavior class");
}

BehaviorClass class_from_id(int id) {
  if (id < 0 || id >= kClassCount)
    throw DataError("class id out of range: " + std::to_string(id));
  return static_cast<BehaviorClass>(id);
}

std::optional<BehaviorClass> class_from_name(std::string_view name) {
  for (int i = 0; i < kClassCount; ++i)
    if (name == class_name(static_cast<BehaviorClass>(i)))
      return static_cast<BehaviorClass>(i);
  return std::nullopt;
}

PixelRect denormalize_box(const BoundingBox& box, int image_w, int image_h) {
  const int w_px = std::max(1LL, std::llround(box.w * image_w));
  const int h_px = std::max(1LL, std::llround(box.h * image_h));
  int x0 = static_cast<int>(std::llround(box.cx * image_w - w_px / 2.0));
  int y0 = static_cast<int>(std::llround(box.cy * image_h - h_px / 2.0));
  PixelRect r{x0, y0, x0 + w_px, y0 + h_px};
  r.x0 = std::clamp(r.x0, 0, image_w);
  r.x1 = std::clamp(r.x1, 0, image_w);
  r.y0 = std::clamp(r.y0, 0, image_h);
  r.y1 = std::clamp(r.y1, 0, image_h);
  return r;
}

namespace {

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r' || line[i] == '\n'))
      ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' &&
           line[i] != '\r' && line[i] != '\n')
      ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_real(std::string_view tok, const char* what) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw DataError(std::string("non-numeric ") + what + " field: '" +
                    std::string(tok) + "'");
  return v;
}

}  // namespace

std::pair<int, BoundingBox> parse_annotation(std::string_view line,
                                             int image_w, int image_h) {
  if (image_w < 1 || image_h < 1)
    throw DataError("image dimensions must be at least 1x1");
  const auto toks = tokens(line);
  if (toks.size() != 5)
    throw DataError("expected 5 fields, got " + std::to_string(toks.size()));

  int class_id = 0;
  {
    auto [ptr, ec] =
        std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), class_id);
    if (ec != std::errc() || ptr != toks[0].data() + toks[0].size())
      throw DataError("non-numeric class field: '" + std::string(toks[0]) + "'");
  }
  if (class_id < 0 || class_id >= kClassCount)
    throw DataError("class id out of range: " + std::to_string(class_id));

  BoundingBox box;
  box.cx = parse_real(toks[1], "cx");
  box.cy = parse_real(toks[2], "cy");
  box.w = parse_real(toks[3], "w");
  box.h = parse_real(toks[4], "h");
  if (box.cx < 0.0 || box.cx > 1.0 || box.cy < 0.0 || box.cy > 1.0)
    throw DataError("box center outside [0,1]");
  if (box.w <= 0.0 || box.w > 1.0 || box.h <= 0.0 || box.h > 1.0)
    throw DataError("box size outside (0,1]");
  return {class_id, box};
}

std::string serialize_annotation(int class_id, const BoundingBox& box) {
  char buf[32];
  std::string out = std::to_string(class_id);
  for (double v : {box.cx, box.cy, box.w, box.h}) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out += ' ';
    out.append(buf, ptr);
  }
  return out;
}

RoiImage crop_roi(const AnnotatedFrame& frame) {
  if (frame.image.empty()) throw DataError("crop_roi: empty frame image");
  const PixelRect r =
      denormalize_box(frame.box, frame.image.width, frame.image.height);
  if (r.empty())
    throw DataError("crop_roi: degenerate box for frame '" + frame.source_id +
                    "'");
  RoiImage roi;
  roi.image = Image8(r.width(), r.height());
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x)
      for (int c = 0; c < 3; ++c)
        roi.image.at(x - r.x0, y - r.y0, c) = frame.image.at(x, y, c);
  return roi;
}

std::optional<SplitName> split_from_name(std::string_view name) {
  if (name == "train") return SplitName::train;
  if (name == "validation" || name == "val") return SplitName::validation;
  if (name == "test") return SplitName::test;
  return std::nullopt;
}

namespace {

// Largest-remainder apportionment of `total` items over `quotas`.
std::vector<long long> largest_remainder(const std::vector<double>& quotas,
                                         long long total) {
  const std::size_t n = quotas.size();
  std::vector<long long> out(n);
  std::vector<std::pair<double, std::size_t>> rema(n);
  long long assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<long long>(std::floor(quotas[i]));
    assigned += out[i];
    rema[i] = {quotas[i] - std::floor(quotas[i]), i};
  }
  std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  for (long long r = total - assigned, i = 0; r > 0; --r, ++i)
    ++out[rema[static_cast<std::size_t>(i) % n].second];
  return out;
}

}  // namespace

DatasetSplit split_dataset(std::vector<AnnotatedFrame> frames,
                           const SplitRatios& ratios, std::uint64_t seed,
                           const std::map<std::string, SplitName>& overrides) {
  if (frames.empty()) throw DataError("split_dataset: empty input");
  const double sum = ratios.train + ratios.validation + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9)
    throw DataError("split_dataset: ratios must sum to 1");

  DatasetSplit split;
  split.seed = seed;

  // Pin overridden frames first; ratios apply to whatever remains.
  std::vector<AnnotatedFrame> rest;
  rest.reserve(frames.size());
  for (auto& f : frames) {
    auto it = overrides.find(f.source_id);
    if (it == overrides.end()) {
      rest.push_back(std::move(f));
      continue;
    }
    switch (it->second) {
      case SplitName::train: split.train.push_back(std::move(f)); break;
      case SplitName::validation: split.validation.push_back(std::move(f)); break;
      case SplitName::test: split.test.push_back(std::move(f)); break;
    }
  }
  if (rest.empty()) return split;

  // Group by class, shuffle each group under a per-class subkey of the
  // one seed.
  std::vector<std::vector<std::size_t>> by_class(kClassCount);
  for (std::size_t i = 0; i < rest.size(); ++i)
    by_class[static_cast<int>(rest[i].label)].push_back(i);
  for (int c = 0; c < kClassCount; ++c) {
    auto& idx = by_class[c];
    CounterRng rng(mix_keys(seed, 0x5117ULL + c));
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.next_below(i)]);
  }

  const long long n = static_cast<long long>(rest.size());
  const auto totals = largest_remainder(
      {ratios.train * n, ratios.validation * n, ratios.test * n}, n);

  // Per-class validation/test counts by largest remainder against the
  // global totals; train takes the rest, so class balance stays within
  // one frame of the quota in each split.
  std::vector<double> val_quota(kClassCount), test_quota(kClassCount);
  for (int c = 0; c < kClassCount; ++c) {
    const double nc = static_cast<double>(by_class[c].size());
    val_quota[c] = nc * totals[1] / n;
    test_quota[c] = nc * totals[2] / n;
  }
  auto val_counts = largest_remainder(val_quota, totals[1]);
  auto test_counts = largest_remainder(test_quota, totals[2]);
  for (int c = 0; c < kClassCount; ++c) {
    const long long nc = static_cast<long long>(by_class[c].size());
    val_counts[c] = std::min(val_counts[c], nc);
    test_counts[c] = std::min(test_counts[c], nc - val_counts[c]);
  }

  for (int c = 0; c < kClassCount; ++c) {
    const auto& idx = by_class[c];
    const long long nc = static_cast<long long>(idx.size());
    const long long nv = val_counts[c];
    const long long nt = test_counts[c];
    const long long ntr = nc - nv - nt;
    for (long long i = 0; i < nc; ++i) {
      auto& f = rest[idx[static_cast<std::size_t>(i)]];
      if (i < ntr)
        split.train.push_back(std::move(f));
      else if (i < ntr + nv)
        split.validation.push_back(std::move(f));
      else
        split.test.push_back(std::move(f));
    }
  }
  return split;
}

std::vector<AnnotatedFrame> load_dataset_dir(
    const std::filesystem::path& images_dir,
    const std::filesystem::path& labels_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(images_dir))
    throw DataError("not a directory: " + images_dir.string());
  if (!fs::is_directory(labels_dir))
    throw DataError("not a directory: " + labels_dir.string());

  std::vector<fs::path> image_paths;
  for (const auto& entry : fs::directory_iterator(images_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg")
      image_paths.push_back(entry.path());
  }
  std::sort(image_paths.begin(), image_paths.end());
  if (image_paths.empty())
    throw DataError("no images found in " + images_dir.string());

  std::vector<AnnotatedFrame> frames;
  frames.reserve(image_paths.size());
  for (const auto& img_path : image_paths) {
    const std::string stem = img_path.stem().string();
    const fs::path label_path = labels_dir / (stem + ".txt");
    if (!fs::exists(label_path))
      throw DataError("missing label file: " + label_path.string());

    AnnotatedFrame frame;
    frame.image = load_image(img_path);
    frame.source_id = stem;

    std::ifstream in(label_path);
    std::string line;
    int line_no = 0, boxes = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (tokens(line).empty()) continue;  // blank lines tolerated
      ++boxes;
      if (boxes > 1)
        throw DataError(label_path.string() + ":" + std::to_string(line_no) +
                        ": more than one box per frame");
      try {
        auto [cid, box] =
            parse_annotation(line, frame.image.width, frame.image.height);
        frame.label = class_from_id(cid);
        frame.box = box;
      } catch (const DataError& e) {
        throw DataError(label_path.string() + ":" + std::to_string(line_no) +
                        ": " + e.what());
      }
    }
    if (boxes == 0)
      throw DataError(label_path.string() + ": no annotation line");
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::map<std::string, SplitName> load_split_overrides(
    const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DataError("cannot open manifest: " + manifest.string());
  std::map<std::string, SplitName> overrides;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = tokens(line);
    if (toks.empty() || toks[0].front() == '#') continue;
    if (toks.size() != 2)
      throw DataError(manifest.string() + ":" + std::to_string(line_no) +
                      ": expected 'stem split'");
    auto split = split_from_name(toks[1]);
    if (!split)
      throw DataError(manifest.string() + ":" + std::to_string(line_no) +
                      ": unknown split '" + std::string(toks[1]) + "'");
    overrides[std::string(toks[0])] = *split;
  }
  return overrides;
}

void save_dataset_dir(const std::filesystem::path& out_dir,
                      const std::vector<AnnotatedFrame>& frames) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "labels");
  for (const auto& f : frames) {
    save_image(out_dir / "images" / (f.source_id + ".png"), f.image);
    std::ofstream out(out_dir / "labels" / (f.source_id + ".txt"));
    out << serialize_annotation(static_cast<int>(f.label), f.box) << "\n";
  }
}

}  // namespace taillight::data
