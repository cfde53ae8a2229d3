#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pad/image/resample.hpp"
#include "pad/preprocess/frames.hpp"

namespace pad {

struct Point2 {
  double x = 0;
  double y = 0;
};

struct EyeLandmarks {
  Point2 left_eye;
  Point2 right_eye;
};

struct AlignParams {
  int canonical_size = 224;
  double eye_row_frac = 0.40;
  double eye_dist_frac = 0.42;
};

inline void validate_landmarks(const EyeLandmarks& lm, int width, int height) {
  auto inside = [&](const Point2& p) {
    return p.x >= 0 && p.y >= 0 && p.x <= width - 1 && p.y <= height - 1;
  };
  if (!inside(lm.left_eye) || !inside(lm.right_eye))
    throw data_error("eye landmarks outside the frame");
  if (std::hypot(lm.right_eye.x - lm.left_eye.x, lm.right_eye.y - lm.left_eye.y) <= 1e-9)
    throw data_error("degenerate landmarks: coincident eyes");
}

// q = scale * R(angle) * p + offset, mapping source pixels to the crop.
struct SimilarityTransform {
  double a = 1, b = 0;  // scale*cos, scale*sin
  double tx = 0, ty = 0;

  Point2 apply(const Point2& p) const { return {a * p.x - b * p.y + tx, b * p.x + a * p.y + ty}; }

  Point2 inverse(const Point2& q) const {
    const double det = a * a + b * b;
    const double dx = q.x - tx, dy = q.y - ty;
    return {(a * dx + b * dy) / det, (-b * dx + a * dy) / det};
  }
};

inline Point2 canonical_left_eye(const AlignParams& p) {
  const double c = p.canonical_size;
  return {c / 2 - p.eye_dist_frac * c / 2, p.eye_row_frac * c};
}

inline Point2 canonical_right_eye(const AlignParams& p) {
  const double c = p.canonical_size;
  return {c / 2 + p.eye_dist_frac * c / 2, p.eye_row_frac * c};
}

inline SimilarityTransform alignment_transform(const EyeLandmarks& lm, const AlignParams& p) {
  const Point2 dl = canonical_left_eye(p), dr = canonical_right_eye(p);
  const double sx = lm.right_eye.x - lm.left_eye.x, sy = lm.right_eye.y - lm.left_eye.y;
  const double dx = dr.x - dl.x, dy = dr.y - dl.y;
  const double den = sx * sx + sy * sy;
  if (den <= 1e-18) throw data_error("degenerate landmarks: coincident eyes");
  // Complex division (dx + i dy) / (sx + i sy).
  SimilarityTransform t;
  t.a = (dx * sx + dy * sy) / den;
  t.b = (dy * sx - dx * sy) / den;
  const Point2 ms{(lm.left_eye.x + lm.right_eye.x) / 2, (lm.left_eye.y + lm.right_eye.y) / 2};
  const Point2 md{(dl.x + dr.x) / 2, (dl.y + dr.y) / 2};
  t.tx = md.x - (t.a * ms.x - t.b * ms.y);
  t.ty = md.y - (t.b * ms.x + t.a * ms.y);
  return t;
}

// Resamples any raster into the canonical crop; pixels with no source are 0.
template <typename T>
Image<T> warp_to_canonical(const Image<T>& src, const SimilarityTransform& t, int size) {
  Image<T> out(size, size, src.channels());
  std::vector<double> px(src.channels());
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const Point2 s = t.inverse({double(x), double(y)});
      if (!sample_bilinear(src, s.x, s.y, px.data())) continue;
      for (int c = 0; c < src.channels(); ++c) {
        if constexpr (std::is_integral_v<T>)
          out.at(x, y, c) = static_cast<T>(std::clamp(std::lround(px[c]), 0L, 255L));
        else
          out.at(x, y, c) = static_cast<T>(px[c]);
      }
    }
  }
  return out;
}

inline Frame align_and_crop(const Frame& frame, const EyeLandmarks& lm,
                            const AlignParams& params = {}) {
  validate_landmarks(lm, frame.pixels.width(), frame.pixels.height());
  const auto t = alignment_transform(lm, params);
  return {warp_to_canonical(frame.pixels, t, params.canonical_size), frame.timestamp_s,
          frame.index};
}

// Sidecar: one "lx ly rx ry" line per extracted frame. Lines that are blank,
// short or contain non-finite values mark a frame without landmarks.
inline std::vector<std::optional<EyeLandmarks>> read_landmarks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read landmarks '" + path.string() + "'");
  std::vector<std::optional<EyeLandmarks>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok[4];
    double v[4];
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i) {
      if (!(ss >> tok[i])) {
        ok = false;
        break;
      }
      try {
        std::size_t used = 0;
        v[i] = std::stod(tok[i], &used);
        ok = used == tok[i].size() && std::isfinite(v[i]);
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (ok)
      out.push_back(EyeLandmarks{{v[0], v[1]}, {v[2], v[3]}});
    else
      out.push_back(std::nullopt);
  }
  return out;
}

inline void write_landmarks(const std::filesystem::path& path,
                            const std::vector<EyeLandmarks>& lms) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write landmarks '" + path.string() + "'");
  out.precision(17);
  for (const auto& lm : lms)
    out << lm.left_eye.x << ' ' << lm.left_eye.y << ' ' << lm.right_eye.x << ' ' << lm.right_eye.y
        << '\n';
}

struct AlignedSequence {
  FrameSequence frames;
  std::vector<int> dropped;  // indices of frames without usable landmarks
};

// Aligns every frame that has landmarks; the rest are dropped. Fails only when
// nothing survives.
inline AlignedSequence align_sequence(const FrameSequence& seq,
                                      const std::vector<std::optional<EyeLandmarks>>& landmarks,
                                      const AlignParams& params = {}) {
  AlignedSequence out;
  out.frames.sample_id = seq.sample_id;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto& f = seq.frames[i];
    if (i >= landmarks.size() || !landmarks[i]) {
      out.dropped.push_back(f.index);
      continue;
    }
    try {
      out.frames.frames.push_back(align_and_crop(f, *landmarks[i], params));
    } catch (const Error&) {
      out.dropped.push_back(f.index);
    }
  }
  if (out.frames.frames.empty())
    throw data_error("sample '" + seq.sample_id + "': no frame has usable landmarks");
  return out;
}

}  // namespace pad
