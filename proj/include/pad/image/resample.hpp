#pragma once

#include <algorithm>
#include <cmath>

#include "pad/image/image.hpp"

namespace pad {

// Bilinear sample at continuous pixel-centre coordinates. Returns false (and
// leaves `out` untouched) when (x, y) falls outside the source raster.
template <typename T>
bool sample_bilinear(const Image<T>& img, double x, double y, double* out) {
  if (x < -0.5 || y < -0.5 || x > img.width() - 0.5 || y > img.height() - 0.5) return false;
  x = std::clamp(x, 0.0, double(img.width() - 1));
  y = std::clamp(y, 0.0, double(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  for (int c = 0; c < img.channels(); ++c) {
    const double top = (1 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
    const double bot = (1 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
    out[c] = (1 - fy) * top + fy * bot;
  }
  return true;
}

inline FloatImage resize_bilinear(const FloatImage& src, int width, int height) {
  FloatImage dst(width, height, src.channels());
  const double sx = double(src.width()) / width;
  const double sy = double(src.height()) / height;
  std::vector<double> px(src.channels());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      sample_bilinear(src, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5, px.data());
      for (int c = 0; c < src.channels(); ++c) dst.at(x, y, c) = static_cast<float>(px[c]);
    }
  }
  return dst;
}

// Box-filter downsample onto a grid of `cols` x `rows` cells. Cell (i, j)
// covers source rows [floor(j*H/rows), floor((j+1)*H/rows)).
inline std::vector<double> cell_means(const FloatImage& src, int channel, int cols, int rows) {
  std::vector<double> out(static_cast<std::size_t>(cols) * rows, 0.0);
  for (int j = 0; j < rows; ++j) {
    const int y0 = j * src.height() / rows;
    const int y1 = std::max(y0 + 1, (j + 1) * src.height() / rows);
    for (int i = 0; i < cols; ++i) {
      const int x0 = i * src.width() / cols;
      const int x1 = std::max(x0 + 1, (i + 1) * src.width() / cols);
      double sum = 0;
      int n = 0;
      for (int y = y0; y < std::min(y1, src.height()); ++y)
        for (int x = x0; x < std::min(x1, src.width()); ++x) {
          sum += src.at(x, y, channel);
          ++n;
        }
      out[static_cast<std::size_t>(j) * cols + i] = n ? sum / n : 0.0;
    }
  }
  return out;
}

}  // namespace pad
