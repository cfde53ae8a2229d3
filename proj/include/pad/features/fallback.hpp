#pragma once

#include <algorithm>
#include <cmath>

#include "pad/features/feature_vector.hpp"
#include "pad/image/resample.hpp"
#include "pad/propmaps/property_map.hpp"

namespace pad {

inline constexpr const char* kFallbackExtractorId = "fallback-v1";

// Offsets into the fallback descriptor. Single-channel maps are replicated to
// three channels; every block is channel-major, rows top to bottom.
struct FallbackLayout {
  static constexpr std::size_t grid16 = 0;       // 3 x 16 x 16 cell means
  static constexpr std::size_t grid8 = 768;      // 3 x 8 x 8 cell means
  static constexpr std::size_t histogram = 960;  // 3 x 256 bins, each channel sums to 1
  static constexpr std::size_t gradient = 1728;  // 16 x 16 mean gradient magnitude
  static constexpr std::size_t padding = 1984;   // zeros up to 2048
};

inline std::vector<float> fallback_descriptor_values(const FloatImage& map) {
  const int w = map.width(), h = map.height();
  FloatImage rgb(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = map.at(x, y, map.channels() == 3 ? c : 0);

  std::vector<float> out(kFeatureDim, 0.0f);
  for (int c = 0; c < 3; ++c) {
    const auto g16 = cell_means(rgb, c, 16, 16);
    for (std::size_t i = 0; i < 256; ++i)
      out[FallbackLayout::grid16 + c * 256 + i] = static_cast<float>(g16[i]);
    const auto g8 = cell_means(rgb, c, 8, 8);
    for (std::size_t i = 0; i < 64; ++i)
      out[FallbackLayout::grid8 + c * 64 + i] = static_cast<float>(g8[i]);

    std::vector<double> hist(256, 0.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double v = std::clamp(double(rgb.at(x, y, c)), 0.0, 1.0);
        hist[std::min<std::size_t>(255, static_cast<std::size_t>(v * 256.0))] += 1.0;
      }
    const double total = double(w) * h;
    for (std::size_t i = 0; i < 256; ++i)
      out[FallbackLayout::histogram + c * 256 + i] = static_cast<float>(hist[i] / total);
  }

  FloatImage grad(w, h, 1);
  auto lum = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return (double(rgb.at(x, y, 0)) + rgb.at(x, y, 1) + rgb.at(x, y, 2)) / 3.0;
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = (lum(x + 1, y) - lum(x - 1, y)) / 2;
      const double gy = (lum(x, y + 1) - lum(x, y - 1)) / 2;
      grad.at(x, y) = static_cast<float>(std::hypot(gx, gy));
    }
  const auto gg = cell_means(grad, 0, 16, 16);
  for (std::size_t i = 0; i < 256; ++i)
    out[FallbackLayout::gradient + i] = static_cast<float>(gg[i]);
  return out;
}

inline FeatureVector fallback_descriptor(const PropertyMap& map, const std::string& sample_id = {}) {
  FeatureVector fv;
  fv.values = fallback_descriptor_values(map.data);
  fv.kind = map.kind;
  fv.sample_id = sample_id;
  fv.frame_index = map.source_frame;
  fv.extractor_id = kFallbackExtractorId;
  validate_feature_values(fv.values, "fallback descriptor");
  return fv;
}

}  // namespace pad
