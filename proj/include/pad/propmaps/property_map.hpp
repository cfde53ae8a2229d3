#pragma once

#include <cmath>

#include "pad/core/types.hpp"
#include "pad/image/image.hpp"

namespace pad {

// Saliency/depth: 1 channel in [0,1]. Illuminant: 3 chromaticity channels
// summing to 1 per pixel.
struct PropertyMap {
  PropertyKind kind = PropertyKind::depth;
  FloatImage data;
  int source_frame = 0;
};

inline void validate_property_map(const PropertyMap& m) {
  const auto& d = m.data;
  const int want = m.kind == PropertyKind::illuminant ? 3 : 1;
  if (d.channels() != want)
    throw internal_error(std::string(to_string(m.kind)) + " map has wrong channel count");
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) {
      double sum = 0;
      for (int c = 0; c < want; ++c) {
        const float v = d.at(x, y, c);
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
          throw internal_error(std::string(to_string(m.kind)) + " map value out of [0,1]");
        sum += v;
      }
      if (want == 3 && std::abs(sum - 1.0) > 1e-6)
        throw internal_error("illuminant chromaticities do not sum to 1");
    }
}

}  // namespace pad
