#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pad/features/fallback.hpp"
#include "pad/image/pfm_io.hpp"
#include "pad/image/png_io.hpp"
#include "pad/preprocess/frames.hpp"
#include "pad/propmaps/illuminant.hpp"

namespace pad {

enum class ExtractorMode { fallback, precomputed, external };

struct ExtractorConfig {
  ExtractorMode mode = ExtractorMode::fallback;
  std::string root;     // precomputed: directory holding {sample_id}/{property}/{index}.padf
  std::string command;  // external: template with {input} (map file) and {output} (PADF)

  std::string id() const {
    switch (mode) {
      case ExtractorMode::fallback: return kFallbackExtractorId;
      case ExtractorMode::precomputed: return "precomputed:" + root;
      case ExtractorMode::external: return "external:" + command;
    }
    return "?";
  }
};

// Map files handed to external tools: PFM for saliency/depth, 8-bit PNG for
// illuminant chromaticities.
inline std::filesystem::path write_map_file(const std::filesystem::path& stem,
                                            const PropertyMap& map) {
  if (map.kind == PropertyKind::illuminant) {
    auto p = stem;
    p += ".png";
    write_png(p, illuminant_to_rgb(map.data));
    return p;
  }
  auto p = stem;
  p += ".pfm";
  write_pfm(p, map.data);
  return p;
}

inline FeatureVector extract_features(const PropertyMap& map, const std::string& sample_id,
                                      const ExtractorConfig& cfg) {
  FeatureVector fv;
  fv.kind = map.kind;
  fv.sample_id = sample_id;
  fv.frame_index = map.source_frame;
  fv.extractor_id = cfg.id();
  switch (cfg.mode) {
    case ExtractorMode::fallback:
      fv.values = fallback_descriptor_values(map.data);
      break;
    case ExtractorMode::precomputed:
      fv.values = read_padf(std::filesystem::path(cfg.root) /
                            feature_relpath(sample_id, map.kind, map.source_frame));
      break;
    case ExtractorMode::external: {
      detail::ScratchDir scratch("features");
      const auto input = write_map_file(scratch.path / "map", map);
      const auto output = scratch.path / "features.padf";
      std::string cmd = detail::substitute(cfg.command, "input", detail::shell_quote(input.string()));
      cmd = detail::substitute(cmd, "output", detail::shell_quote(output.string()));
      if (detail::run_command(cmd) != 0)
        throw data_error("external feature extractor failed on '" + sample_id + "'");
      if (!std::filesystem::exists(output))
        throw data_error("external feature extractor wrote no output for '" + sample_id + "'");
      fv.values = read_padf(output);
      break;
    }
  }
  validate_feature_values(fv.values, sample_id);
  return fv;
}

// Every vector in one training run must come from the same extractor.
inline const std::string& common_extractor_id(const std::vector<FeatureVector>& vectors) {
  if (vectors.empty()) throw data_error("no feature vectors");
  const auto& id = vectors.front().extractor_id;
  for (const auto& v : vectors)
    if (v.extractor_id != id)
      throw data_error("extractor_id mismatch: '" + v.extractor_id + "' vs '" + id + "'");
  return id;
}

}  // namespace pad
