#pragma once

#include <algorithm>
#include <filesystem>
#include <string>

#include "pad/core/log.hpp"
#include "pad/image/pfm_io.hpp"
#include "pad/image/resample.hpp"
#include "pad/preprocess/frames.hpp"
#include "pad/propmaps/property_map.hpp"

namespace pad {

enum class DepthMode { precomputed, constant, external };

struct DepthProviderConfig {
  DepthMode mode = DepthMode::constant;
  // Map file location; {sample_id} and {index} are substituted.
  std::string path_template;
  // External command; {input} (aligned frame PNG), {output} (PFM to write),
  // {sample_id} and {index} are substituted.
  std::string command_template;
  bool strict = false;
};

inline std::string expand_frame_template(std::string tmpl, const std::string& sample_id,
                                         int index) {
  tmpl = detail::substitute(tmpl, "sample_id", sample_id);
  return detail::substitute(tmpl, "index", std::to_string(index));
}

// Affine rescale to [0, 1]; a constant map becomes 0.5 everywhere.
inline FloatImage rescale_unit(const FloatImage& src) {
  FloatImage out(src.width(), src.height(), 1);
  float lo = src.at(0, 0, 0), hi = lo;
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) {
      lo = std::min(lo, src.at(x, y, 0));
      hi = std::max(hi, src.at(x, y, 0));
    }
  const double range = double(hi) - double(lo);
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x)
      out.at(x, y) = range > 0 ? static_cast<float>((double(src.at(x, y, 0)) - lo) / range) : 0.5f;
  return out;
}

inline PropertyMap load_depth_file(const std::filesystem::path& path, int size, int frame_index,
                                   bool strict) {
  if (!std::filesystem::exists(path)) throw data_error("missing depth map '" + path.string() + "'");
  FloatImage raw = read_pfm(path);
  for (float v : raw.data())
    if (!std::isfinite(v)) throw data_error("non-finite value in depth map '" + path.string() + "'");
  if (raw.width() != size || raw.height() != size) {
    const std::string msg = "depth map '" + path.string() + "' is " + std::to_string(raw.width()) +
                            "x" + std::to_string(raw.height()) + ", expected " +
                            std::to_string(size) + "x" + std::to_string(size);
    if (strict) throw data_error(msg);
    log_warning(msg + "; resizing");
    if (raw.channels() != 1) {
      FloatImage first(raw.width(), raw.height(), 1);
      for (int y = 0; y < raw.height(); ++y)
        for (int x = 0; x < raw.width(); ++x) first.at(x, y) = raw.at(x, y, 0);
      raw = std::move(first);
    }
    raw = resize_bilinear(raw, size, size);
  }
  return {PropertyKind::depth, rescale_unit(raw), frame_index};
}

// `aligned_frame_png` is only consulted by the external provider.
inline PropertyMap provide_depth_map(const std::string& sample_id, int index,
                                     const DepthProviderConfig& cfg, int size,
                                     const std::filesystem::path& aligned_frame_png = {}) {
  switch (cfg.mode) {
    case DepthMode::constant:
      return {PropertyKind::depth, FloatImage(size, size, 1, 0.5f), index};
    case DepthMode::precomputed:
      return load_depth_file(expand_frame_template(cfg.path_template, sample_id, index), size,
                             index, cfg.strict);
    case DepthMode::external: {
      detail::ScratchDir scratch("depth");
      const auto out = scratch.path / "depth.pfm";
      std::string cmd = expand_frame_template(cfg.command_template, sample_id, index);
      cmd = detail::substitute(cmd, "input", detail::shell_quote(aligned_frame_png.string()));
      cmd = detail::substitute(cmd, "output", detail::shell_quote(out.string()));
      if (detail::run_command(cmd) != 0)
        throw data_error("external depth command failed for '" + sample_id + "' frame " +
                         std::to_string(index));
      return load_depth_file(out, size, index, cfg.strict);
    }
  }
  throw internal_error("unknown depth mode");
}

}  // namespace pad
