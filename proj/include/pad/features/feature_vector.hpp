#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "pad/core/binio.hpp"
#include "pad/core/types.hpp"

namespace pad {

inline constexpr std::size_t kFeatureDim = 2048;

struct FeatureVector {
  std::vector<float> values;
  PropertyKind kind = PropertyKind::depth;
  std::string sample_id;
  int frame_index = 0;
  std::string extractor_id;
};

inline void validate_feature_values(const std::vector<float>& values, const std::string& source) {
  if (values.size() != kFeatureDim)
    throw data_error("feature dimension " + std::to_string(values.size()) + " in '" + source +
                     "', expected " + std::to_string(kFeatureDim));
  for (float v : values)
    if (!std::isfinite(v)) throw data_error("non-finite feature value in '" + source + "'");
}

// PADF: "PADF", u16 version = 1, u32 count, count x f32; all little-endian.
inline std::vector<char> encode_padf(const std::vector<float>& values) {
  ByteWriter w;
  w.bytes("PADF");
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(values.size()));
  for (float v : values) w.f32(v);
  return w.data();
}

inline std::vector<float> decode_padf(std::vector<char> bytes, const std::string& source) {
  ByteReader r(std::move(bytes), source);
  if (r.bytes(4) != "PADF") throw data_error("'" + source + "' is not a PADF feature file");
  const auto version = r.u16();
  if (version != 1)
    throw data_error("unsupported PADF version " + std::to_string(version) + " in '" + source + "'");
  const auto count = r.u32();
  if (count != kFeatureDim)
    throw data_error("feature dimension " + std::to_string(count) + " in '" + source +
                     "', expected " + std::to_string(kFeatureDim));
  std::vector<float> values(count);
  for (auto& v : values) v = r.f32();
  if (!r.at_end()) throw data_error("trailing bytes in '" + source + "'");
  validate_feature_values(values, source);
  return values;
}

inline void write_padf(const std::filesystem::path& path, const std::vector<float>& values) {
  write_file_atomic(path, encode_padf(values));
}

inline std::vector<float> read_padf(const std::filesystem::path& path) {
  return decode_padf(read_file_bytes(path), path.string());
}

// Relative location of a feature file: {sample_id}/{property}/{index}.padf
inline std::filesystem::path feature_relpath(const std::string& sample_id, PropertyKind kind,
                                             int index) {
  return std::filesystem::path(sample_id) / std::string(to_string(kind)) /
         (std::to_string(index) + ".padf");
}

}  // namespace pad
