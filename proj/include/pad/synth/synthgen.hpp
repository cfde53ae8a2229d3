#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pad/core/binio.hpp"
#include "pad/core/manifest.hpp"
#include "pad/image/pfm_io.hpp"
#include "pad/image/png_io.hpp"
#include "pad/preprocess/align.hpp"

namespace pad {

struct SynthSpec {
  int n_subjects = 10;
  int videos_per_subject = 4;
  int frames_per_video = 10;
  std::uint64_t seed = 7;
  double attack_fraction = 0.5;
  std::string dataset_name = "synth";
  int frame_size = 256;      // rendered source frames are square
  int canonical_size = 224;  // depth maps are written at the aligned crop size
  AlignParams align;
};

inline void validate_synth_spec(const SynthSpec& s) {
  if (s.n_subjects < 1 || s.videos_per_subject < 1 || s.frames_per_video < 1)
    throw usage_error("synthetic dataset counts must all be >= 1");
  if (!(s.attack_fraction > 0 && s.attack_fraction < 1))
    throw usage_error("attack_fraction must lie in (0, 1)");
}

namespace detail {

class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return double(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
}

// Face geometry in canonical-crop coordinates (shared by frames and depth).
struct FaceModel {
  double cx, cy, rx, ry;
};

inline FaceModel face_model(int canonical) {
  const double c = canonical;
  return {c * 0.5, c * 0.53, c * 0.31, c * 0.41};
}

struct FrameStyle {
  bool live = true;
  std::array<double, 3> illuminant{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::array<double, 3> skin{0.62, 0.45, 0.36};
  std::array<double, 3> background{0.30, 0.34, 0.38};
  double texture = 0.06;
  std::uint64_t noise_seed = 0;
};

inline double hash_noise(std::uint64_t seed, int x, int y) {
  std::uint64_t h = mix_seed(seed, (static_cast<std::uint64_t>(std::uint32_t(x)) << 32) |
                                       std::uint32_t(y));
  return double(h >> 11) * 0x1.0p-53 - 0.5;
}

// Renders one source frame. Live faces are shaded spheres with a specular
// lobe under `illuminant`; attacks are flat, evenly lit, low-texture prints
// inside a dark bezel.
inline RgbImage render_frame(int size, int canonical, const SimilarityTransform& to_canonical,
                             const FrameStyle& st) {
  RgbImage img(size, size, 3);
  const auto face = face_model(canonical);
  const double light[3] = {-0.35, -0.45, 0.82};
  const double ln = std::sqrt(light[0] * light[0] + light[1] * light[1] + light[2] * light[2]);
  const double half[3] = {light[0] / ln, light[1] / ln, (light[2] / ln + 1.0)};
  const double hn = std::sqrt(half[0] * half[0] + half[1] * half[1] + half[2] * half[2]);
  const int bezel_in = size / 32, bezel_out = size / 14;

  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const Point2 q = to_canonical.apply({double(x), double(y)});
      const double u = (q.x - face.cx) / face.rx, v = (q.y - face.cy) / face.ry;
      const double r2 = u * u + v * v;
      std::array<double, 3> rgb{};
      const double grain = hash_noise(st.noise_seed, x, y);
      if (r2 < 1.0) {
        const double stripes = 0.5 + 0.5 * std::sin(q.x * 0.9) * std::cos(q.y * 0.7);
        double shade, spec = 0;
        if (st.live) {
          const double nz = std::sqrt(std::max(0.0, 1.0 - r2));
          const double n[3] = {u, v, nz};
          const double ndl = std::max(
              0.0, (n[0] * light[0] + n[1] * light[1] + n[2] * light[2]) / ln);
          shade = 0.30 + 0.70 * ndl;
          const double ndh = std::max(0.0, (n[0] * half[0] + n[1] * half[1] + n[2] * half[2]) / hn);
          spec = 0.55 * std::pow(ndh, 30.0);
        } else {
          shade = 0.80 + 0.05 * v;
        }
        for (int c = 0; c < 3; ++c) {
          const double albedo = std::clamp(
              st.skin[c] * (1.0 + st.texture * (stripes - 0.5) * 2.0 + st.texture * grain), 0.0, 1.0);
          rgb[c] = 3.0 * st.illuminant[c] * (shade * albedo + spec);
        }
      } else {
        for (int c = 0; c < 3; ++c)
          rgb[c] = 3.0 * st.illuminant[c] * st.background[c] * (1.0 + 0.04 * grain);
      }
      if (!st.live) {
        const int edge = std::min(std::min(x, y), std::min(size - 1 - x, size - 1 - y));
        if (edge >= bezel_in && edge < bezel_out)
          for (auto& c : rgb) c = 0.10 + 0.02 * grain;
      }
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = to_byte(rgb[c]);
    }
  return img;
}

inline FloatImage render_depth(int canonical, bool live, double jitter) {
  FloatImage d(canonical, canonical, 1);
  if (!live) {
    for (auto& v : d.data()) v = 3.0f;
    return d;
  }
  const auto face = face_model(canonical);
  for (int y = 0; y < canonical; ++y)
    for (int x = 0; x < canonical; ++x) {
      const double u = (x - face.cx) / face.rx, v = (y - face.cy) / face.ry;
      const double r2 = u * u + v * v;
      // Smooth radial ramp, nearest at the nose.
      const double nose = r2 < 1.0 ? std::sqrt(1.0 - r2) : 0.0;
      d.at(x, y) = static_cast<float>(2.0 + 6.0 * (1.0 - nose) + jitter);
    }
  return d;
}

}  // namespace detail

inline std::string synth_depth_template() { return "depth/{sample_id}/{index}.pfm"; }

// Writes a deterministic synthetic dataset under out_dir:
//   manifest.jsonl, media/<id>/ (video.json + frames), landmarks/<id>.txt,
//   depth/<id>/<index>.pfm
inline DatasetManifest generate_synthetic_dataset(const SynthSpec& spec,
                                                  const std::filesystem::path& out_dir) {
  validate_synth_spec(spec);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  // Subject-disjoint splits from a seeded permutation.
  std::vector<int> subjects(spec.n_subjects);
  for (int i = 0; i < spec.n_subjects; ++i) subjects[i] = i;
  detail::SynthRng split_rng(detail::mix_seed(spec.seed, 0xC0FFEE));
  for (int i = spec.n_subjects - 1; i > 0; --i)
    std::swap(subjects[i], subjects[split_rng.next() % static_cast<std::uint64_t>(i + 1)]);
  std::vector<Split> subject_split(spec.n_subjects, Split::train);
  int n_test = 0, n_dev = 0;
  if (spec.n_subjects >= 3) {
    n_test = std::max(1, static_cast<int>(std::lround(0.3 * spec.n_subjects)));
    n_dev = std::max(1, static_cast<int>(std::lround(0.2 * spec.n_subjects)));
  } else if (spec.n_subjects == 2) {
    n_test = 1;
  }
  for (int i = 0; i < n_test; ++i) subject_split[subjects[i]] = Split::test;
  for (int i = n_test; i < n_test + n_dev; ++i) subject_split[subjects[i]] = Split::dev;

  static const char* kAttackTypes[] = {"print", "mobile", "highdef"};
  DatasetManifest manifest;
  manifest.dataset_name = spec.dataset_name;
  manifest.fps_native = 10.0;
  int attack_counter = 0;
  const double fa = spec.attack_fraction;

  for (int s = 0; s < spec.n_subjects; ++s) {
    detail::SynthRng subject_rng(detail::mix_seed(spec.seed, 1000 + s));
    std::array<double, 3> skin{subject_rng.uniform(0.55, 0.72), subject_rng.uniform(0.40, 0.52),
                               subject_rng.uniform(0.30, 0.42)};
    for (int v = 0; v < spec.videos_per_subject; ++v) {
      const long g = static_cast<long>(s) * spec.videos_per_subject + v;
      const bool attack = std::floor((g + 1) * fa) > std::floor(g * fa);
      char id_buf[64];
      std::snprintf(id_buf, sizeof id_buf, "s%03d_v%02d", s, v);
      const std::string id = id_buf;

      SampleRecord rec;
      rec.sample_id = id;
      rec.media_path = "media/" + id;
      rec.label = attack ? Label::attack : Label::bonafide;
      if (attack) rec.attack_type = kAttackTypes[attack_counter++ % 3];
      rec.subject_id = "subject" + std::to_string(s);
      rec.split = subject_split[s];
      rec.dataset_name = spec.dataset_name;
      rec.landmarks_path = "landmarks/" + id + ".txt";

      const fs::path media_dir = out_dir / "media" / id;
      const fs::path depth_dir = out_dir / "depth" / id;
      fs::create_directories(media_dir);
      fs::create_directories(depth_dir);
      fs::create_directories(out_dir / "landmarks");
      write_text_atomic(media_dir / "video.json", "{\"fps\": 10}\n");

      detail::SynthRng rng(detail::mix_seed(spec.seed, static_cast<std::uint64_t>(g) + 1));
      std::vector<EyeLandmarks> lms;
      for (int f = 0; f < spec.frames_per_video; ++f) {
        const double size = spec.frame_size;
        const double dist = size * rng.uniform(0.36, 0.42);
        const double roll = rng.uniform(-0.08, 0.08);
        const Point2 mid{size * 0.5 + rng.uniform(-6, 6), size * 0.44 + rng.uniform(-6, 6)};
        const EyeLandmarks lm{{mid.x - dist / 2 * std::cos(roll), mid.y - dist / 2 * std::sin(roll)},
                              {mid.x + dist / 2 * std::cos(roll), mid.y + dist / 2 * std::sin(roll)}};
        lms.push_back(lm);
        AlignParams ap = spec.align;
        ap.canonical_size = spec.canonical_size;

        detail::FrameStyle st;
        st.live = !attack;
        st.skin = skin;
        st.noise_seed = detail::mix_seed(spec.seed, 1'000'000 + g * 1000 + f);
        if (attack) {
          st.texture = 0.015;
        } else {
          std::array<double, 3> ill{};
          double sum = 0;
          for (int c = 0; c < 3; ++c) {
            ill[c] = 1.0 / 3 + rng.uniform(-0.05, 0.05);
            sum += ill[c];
          }
          for (auto& c : ill) c /= sum;
          st.illuminant = ill;
        }
        const auto img = detail::render_frame(spec.frame_size, spec.canonical_size,
                                              alignment_transform(lm, ap), st);
        char name[32];
        std::snprintf(name, sizeof name, "%06d.png", f);
        write_png(media_dir / name, img);
        write_pfm(depth_dir / (std::to_string(f) + ".pfm"),
                  detail::render_depth(spec.canonical_size, !attack, rng.uniform(-0.2, 0.2)));
      }
      write_landmarks(out_dir / "landmarks" / (id + ".txt"), lms);
      manifest.records.push_back(rec);
    }
  }
  validate_manifest(manifest);
  write_manifest(out_dir / "manifest.jsonl", manifest);
  return manifest;
}

}  // namespace pad
