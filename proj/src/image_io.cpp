#include "taillight/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace taillight {

namespace {

Image8 from_bgr_mat(const cv::Mat& mat, const std::string& what) {
  if (mat.empty()) throw DataError("cannot decode image: " + what);
  cv::Mat bgr;
  if (mat.channels() == 3)
    bgr = mat;
  else if (mat.channels() == 1)
    cv::mixChannels({mat}, {bgr = cv::Mat(mat.rows, mat.cols, CV_8UC3)},
                    {0, 0, 0, 1, 0, 2});
  else if (mat.channels() == 4)
    cv::mixChannels({mat}, {bgr = cv::Mat(mat.rows, mat.cols, CV_8UC3)},
                    {0, 0, 1, 1, 2, 2});
  else
    throw DataError("unsupported channel count in " + what);

  Image8 img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<std::uint8_t>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.at(x, y, 0) = row[x * 3 + 2];
      img.at(x, y, 1) = row[x * 3 + 1];
      img.at(x, y, 2) = row[x * 3 + 0];
    }
  }
  return img;
}

cv::Mat to_bgr_mat(const Image8& img) {
  cv::Mat bgr(img.height, img.width, CV_8UC3);
  for (int y = 0; y < img.height; ++y) {
    auto* row = bgr.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.width; ++x) {
      row[x * 3 + 0] = img.at(x, y, 2);
      row[x * 3 + 1] = img.at(x, y, 1);
      row[x * 3 + 2] = img.at(x, y, 0);
    }
  }
  return bgr;
}

}  // namespace

Image8 load_image(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  return from_bgr_mat(mat, path.string());
}

void save_image(const std::filesystem::path& path, const Image8& img) {
  if (img.empty()) throw DataError("save_image: empty image");
  if (!cv::imwrite(path.string(), to_bgr_mat(img)))
    throw DataError("cannot write image: " + path.string());
}

Image8 jpeg_roundtrip(const Image8& img, int quality) {
  if (img.empty()) throw DataError("jpeg_roundtrip: empty image");
  if (quality < 1 || quality > 100)
    throw DataError("jpeg quality outside 1..100");
  std::vector<std::uint8_t> buf;
  cv::imencode(".jpg", to_bgr_mat(img),
               buf, {cv::IMWRITE_JPEG_QUALITY, quality});
  cv::Mat decoded = cv::imdecode(buf, cv::IMREAD_COLOR);
  return from_bgr_mat(decoded, "jpeg buffer");
}

}  // namespace taillight
