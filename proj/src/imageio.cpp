// Copyright 2026 The amrkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "amr/imageio.hpp"

#include <opencv2/imgcodecs.hpp>

#include "amr/error.hpp"

namespace amr {

Raster load_image(const std::filesystem::path& path) {
  const cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (m.empty()) throw Error(ErrorKind::IoError, "cannot decode image " + path.string());
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(m.total()) * 3);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint8_t>(y);
    std::copy(row, row + static_cast<std::ptrdiff_t>(m.cols) * 3,
              pixels.begin() + static_cast<std::ptrdiff_t>(y) * m.cols * 3);
  }
  return Raster(m.cols, m.rows, 3, std::move(pixels));
}

void save_png(const std::filesystem::path& path, const Raster& image) {
  const int type = image.channels() == 3 ? CV_8UC3 : CV_8UC1;
  const cv::Mat m(image.height(), image.width(), type, const_cast<std::uint8_t*>(image.pixels().data()));
  auto tmp = path;
  tmp += ".tmp.png";
  if (!cv::imwrite(tmp.string(), m)) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  std::filesystem::rename(tmp, path);
}

}  // namespace amr
