#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "pad/image/png_io.hpp"

namespace pad {

struct Frame {
  RgbImage pixels;
  double timestamp_s = 0.0;
  int index = 0;
};

struct FrameSequence {
  std::string sample_id;
  std::vector<Frame> frames;

  std::size_t n() const { return frames.size(); }
};

inline void validate_sequence(const FrameSequence& seq) {
  if (seq.frames.empty()) throw data_error("sample '" + seq.sample_id + "' has no frames");
  for (std::size_t i = 1; i < seq.frames.size(); ++i)
    if (!(seq.frames[i].timestamp_s > seq.frames[i - 1].timestamp_s))
      throw data_error("sample '" + seq.sample_id + "': timestamps not strictly increasing");
}

struct DecoderConfig {
  // Template with {input}, {rate} and {outdir}; the command must leave PNG
  // frames in {outdir}, named so that lexical order is temporal order.
  std::string command;
};

// Timestamps at which frames are taken from a clip of `duration_s` seconds.
inline std::vector<double> sample_times(double duration_s, double rate_hz) {
  if (!(duration_s > 0)) throw data_error("zero-duration media");
  if (!(rate_hz > 0)) throw data_error("frame rate must be positive");
  const auto count = std::max<long>(1, static_cast<long>(std::floor(duration_s * rate_hz + 1e-9)));
  std::vector<double> t(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) t[static_cast<std::size_t>(k)] = double(k) / rate_hz;
  return t;
}

namespace detail {

inline std::vector<std::filesystem::path> sorted_pngs(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

inline std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
  const std::string needle = "{" + key + "}";
  for (auto pos = tmpl.find(needle); pos != std::string::npos;
       pos = tmpl.find(needle, pos + value.size()))
    tmpl.replace(pos, needle.size(), value);
  return tmpl;
}

inline std::filesystem::path make_scratch_dir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("pad-" + tag + "-" + std::to_string(::getpid()) + "-" +
              std::to_string(counter.fetch_add(1)));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline int run_command(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct ScratchDir {
  explicit ScratchDir(const std::string& tag) : path(make_scratch_dir(tag)) {}
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  std::filesystem::path path;
};

}  // namespace detail

// A frame-directory clip: a directory holding `video.json` ({"fps": <native
// rate>}) and its native frames as PNG files in lexical order.
inline bool is_frame_directory(const std::filesystem::path& p) {
  return std::filesystem::is_directory(p) && std::filesystem::exists(p / "video.json");
}

inline bool is_still_image(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return std::filesystem::is_regular_file(p) && ext == ".png";
}

inline FrameSequence extract_frames(const std::string& sample_id,
                                    const std::filesystem::path& media, double rate_hz = 10.0,
                                    const DecoderConfig& decoder = {}) {
  FrameSequence seq;
  seq.sample_id = sample_id;
  if (!(rate_hz > 0)) throw data_error("frame rate must be positive");

  if (is_still_image(media)) {
    // Still images are one-frame videos.
    seq.frames.push_back({read_png(media), 0.0, 0});
    return seq;
  }

  if (is_frame_directory(media)) {
    std::ifstream meta_in(media / "video.json");
    nlohmann::json meta;
    try {
      meta_in >> meta;
    } catch (const nlohmann::json::exception& e) {
      throw data_error("undecodable media '" + media.string() + "': " + e.what());
    }
    const double fps = meta.value("fps", 0.0);
    if (!(fps > 0)) throw data_error("undecodable media '" + media.string() + "': bad fps");
    if (rate_hz > fps + 1e-9)
      throw data_error("sampling rate " + std::to_string(rate_hz) + " exceeds native fps " +
                       std::to_string(fps) + " of '" + media.string() + "'");
    const auto native = detail::sorted_pngs(media);
    if (native.empty()) throw data_error("zero-duration media '" + media.string() + "'");
    const double duration = double(native.size()) / fps;
    const auto times = sample_times(duration, rate_hz);
    for (std::size_t k = 0; k < times.size(); ++k) {
      auto src = static_cast<std::size_t>(std::floor(times[k] * fps + 1e-9));
      src = std::min(src, native.size() - 1);
      seq.frames.push_back({read_png(native[src]), times[k], static_cast<int>(k)});
    }
    return seq;
  }

  if (!std::filesystem::exists(media))
    throw data_error("missing media file '" + media.string() + "'");
  if (decoder.command.empty())
    throw data_error("undecodable media '" + media.string() + "': no decoder command configured");

  detail::ScratchDir scratch("frames");
  std::string cmd = decoder.command;
  cmd = detail::substitute(cmd, "input", detail::shell_quote(media.string()));
  cmd = detail::substitute(cmd, "rate", std::to_string(rate_hz));
  cmd = detail::substitute(cmd, "outdir", detail::shell_quote(scratch.path.string()));
  if (detail::run_command(cmd) != 0)
    throw data_error("decoder failed on '" + media.string() + "'");
  const auto files = detail::sorted_pngs(scratch.path);
  if (files.empty()) throw data_error("zero-duration media '" + media.string() + "'");
  for (std::size_t k = 0; k < files.size(); ++k)
    seq.frames.push_back({read_png(files[k]), double(k) / rate_hz, static_cast<int>(k)});
  return seq;
}

}  // namespace pad
