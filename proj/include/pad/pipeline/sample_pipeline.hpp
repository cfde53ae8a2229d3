#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pad/core/binio.hpp"
#include "pad/core/log.hpp"
#include "pad/eval/runner.hpp"
#include "pad/pipeline/config.hpp"
#include "pad/preprocess/align.hpp"
#include "pad/preprocess/frames.hpp"
#include "pad/propmaps/depth.hpp"
#include "pad/propmaps/illuminant.hpp"
#include "pad/propmaps/saliency.hpp"
#include "pad/propmaps/superpixels.hpp"

namespace pad {

enum class Stage { frames, aligned, maps, features };

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::frames: return "frames";
    case Stage::aligned: return "aligned";
    case Stage::maps: return "maps";
    case Stage::features: return "features";
  }
  return "?";
}

// Config sections each stage depends on. A stage's cache key covers its own
// keys plus everything upstream, so tuning the classifier never invalidates maps.
inline std::vector<std::string> stage_key_prefixes(Stage s) {
  std::vector<std::string> p = {"preprocess.rate_hz", "preprocess.decoder_command"};
  if (s >= Stage::aligned) p.push_back("preprocess.");
  if (s >= Stage::maps) {
    p.push_back("propmaps.");
    p.push_back("run.strict");
  }
  if (s >= Stage::features) p.push_back("features.");
  return p;
}

inline std::string stage_digest(const RunConfig& cfg, Stage s) {
  RunConfig sub;
  for (const auto& [k, v] : cfg.values)
    for (const auto& pre : stage_key_prefixes(s))
      if (k.rfind(pre, 0) == 0) {
        sub.values[k] = v;
        break;
      }
  return sub.digest();
}

struct StageCache {
  std::filesystem::path root;

  std::filesystem::path dir(Stage s, const std::string& digest, const SampleRecord& r) const {
    return root / std::string(to_string(s)) / digest.substr(0, 16) / r.dataset_name / r.sample_id;
  }
};

inline std::string frame_name(int index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d%s", index, ext);
  return buf;
}

// Runs (or reuses) every stage for one sample. Thread-safe across distinct samples.
class SampleProcessor {
 public:
  SampleProcessor(RunConfig cfg, std::filesystem::path cache_root, bool force = false)
      : cfg_(std::move(cfg)), cache_{std::move(cache_root)}, force_(force) {
    for (auto s : {Stage::frames, Stage::aligned, Stage::maps, Stage::features})
      digests_[static_cast<int>(s)] = stage_digest(cfg_, s);
    align_ = cfg_.align();
    slic_ = cfg_.slic();
    saliency_ = cfg_.saliency();
    illum_ = cfg_.illuminant();
    depth_ = cfg_.depth();
    extractor_ = cfg_.extractor();
    decoder_.command = cfg_.get("preprocess.decoder_command");
  }

  const std::string& digest(Stage s) const { return digests_[static_cast<int>(s)]; }
  std::filesystem::path stage_dir(Stage s, const SampleRecord& r) const {
    return cache_.dir(s, digest(s), r);
  }

  // Frames sampled from the media, stored as PNG.
  std::filesystem::path frames(const SampleRecord& r) {
    const auto dir = stage_dir(Stage::frames, r);
    if (is_done(dir)) return dir;
    const auto seq = extract_frames(r.sample_id, r.media_path, cfg_.get_double("preprocess.rate_hz"),
                                    decoder_);
    validate_sequence(seq);
    nlohmann::json meta = stage_meta(Stage::frames, r);
    for (const auto& f : seq.frames) {
      write_png_atomic(dir / frame_name(f.index, ".png"), f.pixels);
      meta["frames"].push_back({{"index", f.index}, {"timestamp_s", f.timestamp_s}});
    }
    finish(dir, meta);
    return dir;
  }

  // Canonical eye-aligned crops.
  std::filesystem::path aligned(const SampleRecord& r) {
    const auto dir = stage_dir(Stage::aligned, r);
    if (is_done(dir)) return dir;
    const auto src = frames(r);
    const auto seq = load_frames(r.sample_id, src);
    const auto lms = landmarks_for(r, src);
    const auto out = align_sequence(seq, lms, align_);
    for (int d : out.dropped)
      log_warning("sample '" + r.sample_id + "': frame " + std::to_string(d) +
                  " has no usable landmarks; dropped");
    nlohmann::json meta = stage_meta(Stage::aligned, r);
    meta["dropped"] = out.dropped;
    for (const auto& f : out.frames.frames) {
      write_png_atomic(dir / frame_name(f.index, ".png"), f.pixels);
      meta["frames"].push_back({{"index", f.index}, {"timestamp_s", f.timestamp_s}});
    }
    finish(dir, meta);
    return dir;
  }

  // Depth, illuminant and saliency maps per aligned frame (PFM; illuminant also as PNG).
  std::filesystem::path maps(const SampleRecord& r) {
    const auto dir = stage_dir(Stage::maps, r);
    if (is_done(dir)) return dir;
    const auto src = aligned(r);
    const auto seq = load_frames(r.sample_id, src);
    nlohmann::json meta = stage_meta(Stage::maps, r);
    for (const auto& f : seq.frames) {
      const auto graph = segment_superpixels(f.pixels, slic_);
      const auto illum = estimate_illuminant_map(f.pixels, graph, f.index, illum_);
      const auto sal = estimate_saliency_map(graph, f.index, saliency_);
      const auto depth = provide_depth_map(r.sample_id, f.index, depth_, f.pixels.width(),
                                           src / frame_name(f.index, ".png"));
      for (const auto* m : {&depth, &illum, &sal}) {
        validate_property_map(*m);
        write_pfm_atomic(dir / map_name(m->kind, f.index), m->data);
      }
      write_png_atomic(dir / (std::string("illuminant_") + frame_name(f.index, ".png")),
                       illuminant_to_rgb(illum.data));
      meta["frames"].push_back({{"index", f.index}, {"timestamp_s", f.timestamp_s}});
    }
    finish(dir, meta);
    return dir;
  }

  std::filesystem::path features_dir(const SampleRecord& r) {
    const auto dir = stage_dir(Stage::features, r);
    if (is_done(dir)) return dir;
    const auto src = maps(r);
    const auto src_meta = read_meta(src);
    nlohmann::json meta = stage_meta(Stage::features, r);
    meta["extractor_id"] = extractor_.id();
    for (const auto& fr : src_meta.at("frames")) {
      const int index = fr.at("index").get<int>();
      for (auto k : kAllProperties) {
        PropertyMap m{k, read_pfm(src / map_name(k, index)), index};
        const auto fv = extract_features(m, r.sample_id, extractor_);
        const auto path = dir / feature_relpath(r.sample_id, k, index).lexically_relative(r.sample_id);
        std::filesystem::create_directories(path.parent_path());
        write_file_atomic(path, encode_padf(fv.values));
      }
      meta["frames"].push_back(fr);
    }
    finish(dir, meta);
    return dir;
  }

  SampleFeatures features(const SampleRecord& r) {
    const auto dir = features_dir(r);
    const auto meta = read_meta(dir);
    SampleFeatures out;
    out.record = r;
    const auto id = meta.at("extractor_id").get<std::string>();
    for (const auto& fr : meta.at("frames")) {
      const int index = fr.at("index").get<int>();
      for (auto k : kAllProperties) {
        FeatureVector fv;
        fv.kind = k;
        fv.sample_id = r.sample_id;
        fv.frame_index = index;
        fv.extractor_id = id;
        fv.values =
            read_padf(dir / feature_relpath(r.sample_id, k, index).lexically_relative(r.sample_id));
        out.by_property[static_cast<std::size_t>(k)].push_back(std::move(fv));
      }
    }
    return out;
  }

  FeatureProvider provider() {
    return [this](const SampleRecord& r) { return features(r); };
  }

  std::filesystem::path run_until(Stage s, const SampleRecord& r) {
    switch (s) {
      case Stage::frames: return frames(r);
      case Stage::aligned: return aligned(r);
      case Stage::maps: return maps(r);
      case Stage::features: return features_dir(r);
    }
    throw internal_error("unknown stage");
  }

 private:
  static std::string map_name(PropertyKind k, int index) {
    return std::string(to_string(k)) + "_" + frame_name(index, ".pfm");
  }

  static void write_png_atomic(const std::filesystem::path& p, const RgbImage& img) {
    std::filesystem::create_directories(p.parent_path());
    auto tmp = p;
    tmp += ".tmp";
    write_png(tmp, img);
    std::filesystem::rename(tmp, p);
  }

  static void write_pfm_atomic(const std::filesystem::path& p, const FloatImage& img) {
    std::filesystem::create_directories(p.parent_path());
    auto tmp = p;
    tmp += ".tmp";
    write_pfm(tmp, img);
    std::filesystem::rename(tmp, p);
  }

  nlohmann::json stage_meta(Stage s, const SampleRecord& r) const {
    return {{"stage", std::string(to_string(s))},
            {"sample_id", r.sample_id},
            {"dataset_name", r.dataset_name},
            {"stage_digest", digest(s)},
            {"config_digest", cfg_.digest()},
            {"frames", nlohmann::json::array()}};
  }

  // The marker is written last; its presence means the directory is complete.
  static void finish(const std::filesystem::path& dir, const nlohmann::json& meta) {
    std::filesystem::create_directories(dir);
    write_text_atomic(dir / "stage.json", meta.dump(1) + "\n");
  }

  bool is_done(const std::filesystem::path& dir) const {
    if (force_) return false;
    return std::filesystem::exists(dir / "stage.json");
  }

  static nlohmann::json read_meta(const std::filesystem::path& dir) {
    try {
      return nlohmann::json::parse(read_text_file(dir / "stage.json"));
    } catch (const nlohmann::json::exception& e) {
      throw data_error("corrupt cache marker in '" + dir.string() + "': " + e.what());
    }
  }

  static FrameSequence load_frames(const std::string& id, const std::filesystem::path& dir) {
    FrameSequence seq;
    seq.sample_id = id;
    const auto meta = read_meta(dir);
    for (const auto& fr : meta.at("frames")) {
      const int index = fr.at("index").get<int>();
      seq.frames.push_back(
          {read_png(dir / frame_name(index, ".png")), fr.at("timestamp_s").get<double>(), index});
    }
    return seq;
  }

  // Sidecar from the manifest, else the configured landmark command.
  std::vector<std::optional<EyeLandmarks>> landmarks_for(const SampleRecord& r,
                                                         const std::filesystem::path& frames_dir) {
    if (r.landmarks_path) return read_landmarks(*r.landmarks_path);
    const auto& cmd_t = cfg_.get("preprocess.landmark_command");
    if (cmd_t.empty())
      throw data_error("sample '" + r.sample_id +
                       "' has no landmarks_path and no landmark_command is configured");
    const auto out = frames_dir / "landmarks.txt";
    std::string cmd = detail::substitute(cmd_t, "input", detail::shell_quote(frames_dir.string()));
    cmd = detail::substitute(cmd, "output", detail::shell_quote(out.string()));
    if (detail::run_command(cmd) != 0)
      throw data_error("landmark command failed for '" + r.sample_id + "'");
    return read_landmarks(out);
  }

  RunConfig cfg_;
  StageCache cache_;
  bool force_;
  std::string digests_[4];
  AlignParams align_;
  SlicParams slic_;
  SaliencyParams saliency_;
  IlluminantParams illum_;
  DepthProviderConfig depth_;
  ExtractorConfig extractor_;
  DecoderConfig decoder_;
};

}  // namespace pad
