#pragma once

#include <filesystem>

#include "pad/classify/svm.hpp"
#include "pad/core/binio.hpp"

namespace pad {

// PADM layout (little-endian):
//   "PADM" u16 version=1 u8 kernel u8 role
//   f64 gamma, c, bias, platt_a, platt_b, tol, kkt_gap
//   u8 calibrated, u8 class_weights, u8 standardized, u64 seed, u64 iterations
//   str extractor_id
//   u32 dim, u32 n_sv
//   [standardized] dim x f64 mean, dim x f64 scale
//   n_sv x (f64 coef, dim x f64 support vector)
// where str = u32 length + bytes.
inline std::vector<char> encode_padm(const SvmModel& m) {
  ByteWriter w;
  w.bytes("PADM");
  w.u16(1);
  w.u8(static_cast<std::uint8_t>(m.kernel));
  w.u8(static_cast<std::uint8_t>(m.role));
  for (double v : {m.gamma, m.c, m.bias, m.platt_a, m.platt_b, m.tol, m.kkt_gap}) w.f64(v);
  w.u8(m.calibrated);
  w.u8(m.class_weights);
  w.u8(!m.feature_mean.empty());
  w.u64(m.seed);
  w.u64(static_cast<std::uint64_t>(m.iterations));
  w.str(m.extractor_id);
  const auto dim = m.dim();
  w.u32(static_cast<std::uint32_t>(dim));
  w.u32(static_cast<std::uint32_t>(m.support_vectors.size()));
  if (!m.feature_mean.empty()) {
    for (double v : m.feature_mean) w.f64(v);
    for (double v : m.feature_scale) w.f64(v);
  }
  for (std::size_t k = 0; k < m.support_vectors.size(); ++k) {
    w.f64(m.dual_coefs[k]);
    for (double v : m.support_vectors[k]) w.f64(v);
  }
  return w.data();
}

inline SvmModel decode_padm(std::vector<char> bytes, const std::string& source) {
  ByteReader r(std::move(bytes), source);
  if (r.bytes(4) != "PADM") throw data_error("'" + source + "' is not a PADM model file");
  if (const auto v = r.u16(); v != 1)
    throw data_error("unsupported PADM version " + std::to_string(v) + " in '" + source + "'");
  SvmModel m;
  const auto kernel = r.u8();
  const auto role = r.u8();
  if (kernel > 1 || role > 4) throw data_error("corrupt PADM header in '" + source + "'");
  m.kernel = static_cast<KernelType>(kernel);
  m.role = static_cast<ModelRole>(role);
  m.gamma = r.f64();
  m.c = r.f64();
  m.bias = r.f64();
  m.platt_a = r.f64();
  m.platt_b = r.f64();
  m.tol = r.f64();
  m.kkt_gap = r.f64();
  m.calibrated = r.u8() != 0;
  m.class_weights = r.u8() != 0;
  const bool standardized = r.u8() != 0;
  m.seed = r.u64();
  m.iterations = static_cast<long>(r.u64());
  m.extractor_id = r.str();
  const auto dim = r.u32();
  const auto n_sv = r.u32();
  m.input_dim = dim;
  if (standardized) {
    m.feature_mean.resize(dim);
    m.feature_scale.resize(dim);
    for (auto& v : m.feature_mean) v = r.f64();
    for (auto& v : m.feature_scale) v = r.f64();
  }
  m.support_vectors.assign(n_sv, std::vector<double>(dim));
  m.dual_coefs.resize(n_sv);
  for (std::uint32_t k = 0; k < n_sv; ++k) {
    m.dual_coefs[k] = r.f64();
    for (auto& v : m.support_vectors[k]) v = r.f64();
  }
  if (!r.at_end()) throw data_error("trailing bytes in '" + source + "'");
  return m;
}

inline void save_model(const std::filesystem::path& path, const SvmModel& m) {
  write_file_atomic(path, encode_padm(m));
}

inline SvmModel load_model(const std::filesystem::path& path) {
  return decode_padm(read_file_bytes(path), path.string());
}

}  // namespace pad
