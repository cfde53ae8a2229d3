#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pad/image/image.hpp"

namespace pad {

// Portable float map. "Pf" = 1 channel, "PF" = 3 channels. A negative scale
// marks little-endian samples; rows are stored bottom-up.
inline void write_pfm(const std::filesystem::path& path, const FloatImage& img) {
  if (img.channels() != 1 && img.channels() != 3)
    throw internal_error("PFM supports 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write PFM '" + path.string() + "'");
  out << (img.channels() == 1 ? "Pf" : "PF") << '\n'
      << img.width() << ' ' << img.height() << '\n'
      << "-1.0\n";
  const std::size_t row_len = static_cast<std::size_t>(img.width()) * img.channels();
  std::vector<char> buf(row_len * 4);
  for (int y = img.height() - 1; y >= 0; --y) {
    const float* src = &img.at(0, y, 0);
    for (std::size_t i = 0; i < row_len; ++i) {
      auto bits = std::bit_cast<std::uint32_t>(src[i]);
      for (int b = 0; b < 4; ++b) buf[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw data_error("failed writing PFM '" + path.string() + "'");
}

inline FloatImage read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open PFM '" + path.string() + "'");
  std::string magic;
  int w = 0, h = 0;
  double scale = 0;
  in >> magic >> w >> h >> scale;
  if (!in || (magic != "Pf" && magic != "PF") || w <= 0 || h <= 0 || scale == 0.0)
    throw data_error("bad PFM header in '" + path.string() + "'");
  in.get();  // single whitespace byte before the raster
  const int channels = magic == "Pf" ? 1 : 3;
  const bool little = scale < 0;
  FloatImage img(w, h, channels);
  const std::size_t row_len = static_cast<std::size_t>(w) * channels;
  std::vector<unsigned char> buf(row_len * 4);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw data_error("truncated PFM '" + path.string() + "'");
    float* dst = &img.at(0, y, 0);
    for (std::size_t i = 0; i < row_len; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        const int shift = little ? 8 * b : 8 * (3 - b);
        bits |= static_cast<std::uint32_t>(buf[i * 4 + b]) << shift;
      }
      dst[i] = std::bit_cast<float>(bits);
    }
  }
  return img;
}

}  // namespace pad
