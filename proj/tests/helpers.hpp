#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "pad/image/png_io.hpp"
#include "pad/preprocess/align.hpp"

namespace testutil {

// Smooth, non-symmetric RGB pattern (resampling-friendly "face").
inline pad::RgbImage smooth_pattern(int w, int h, double phase = 0) {
  pad::RgbImage img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = static_cast<std::uint8_t>(128 + 60 * std::sin(x / 9.0 + phase) * std::cos(y / 11.0));
      img.at(x, y, 1) = static_cast<std::uint8_t>(120 + 50 * std::cos((x + y) / 13.0 + phase));
      img.at(x, y, 2) = static_cast<std::uint8_t>(100 + 40 * std::sin((x - 2 * y) / 17.0));
    }
  return img;
}

// Frame directory: video.json with the given fps and one PNG per native frame;
// frame i is a flat image with red = i % 256 and green = i / 256.
inline void write_frame_directory(const std::filesystem::path& dir, int n_frames, double fps,
                                  int w = 8, int h = 8) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "video.json") << "{\"fps\": " << fps << "}\n";
  for (int i = 0; i < n_frames; ++i) {
    pad::RgbImage img(w, h, 3);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        img.at(x, y, 0) = static_cast<std::uint8_t>(i % 256);
        img.at(x, y, 1) = static_cast<std::uint8_t>(i / 256);
      }
    char name[32];
    std::snprintf(name, sizeof name, "%06d.png", i);
    pad::write_png(dir / name, img);
  }
}

inline int frame_tag(const pad::RgbImage& img) { return img.at(0, 0, 0) + 256 * img.at(0, 0, 1); }

inline double mean_abs_diff(const pad::RgbImage& a, const pad::RgbImage& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += std::abs(double(a.data()[i]) - double(b.data()[i]));
  return s / double(a.data().size());
}

inline double mean_intensity(const pad::RgbImage& a) {
  double s = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i];
  return s / double(a.data().size());
}

}  // namespace testutil
