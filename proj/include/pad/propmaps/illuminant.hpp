#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "pad/propmaps/property_map.hpp"
#include "pad/propmaps/superpixels.hpp"

namespace pad {

struct IlluminantParams {
  double intercept_bin = 0.01;  // Hough bin width over intercepts in [0, 1]
  double slope_bin = 0.01;
  double slope_range = 3.0;     // |slope| covered by the accumulator
  double intensity_low = 0.03;  // mean channel intensity gates
  double intensity_high = 0.98;
  int min_pixels = 16;
  double flat_spread = 0.005;  // chromaticity std below which a region is uniform
};

using Chromaticity = std::array<double, 3>;

// A pixel in inverse-intensity / chromaticity space.
struct IicSample {
  std::array<double, 3> chroma;
  double total;  // I_r + I_g + I_b with channels in [0, 1]
};

namespace detail {

inline std::optional<IicSample> iic_sample(std::span<const std::uint8_t> px,
                                           const IlluminantParams& p) {
  const double r = px[0] / 255.0, g = px[1] / 255.0, b = px[2] / 255.0;
  const double total = r + g + b;
  const double mean = total / 3.0;
  if (mean < p.intensity_low || mean > p.intensity_high) return std::nullopt;
  return IicSample{{r / total, g / total, b / total}, total};
}

// Hough vote for the dominant line through the channel's (1/total, chroma)
// points. Every pixel votes, for each intercept bin, for the slope of the line
// joining it to that intercept. Horizontal lines are skipped: diffuse pixels
// of one surface share a chromaticity and would otherwise win with the body
// colour as intercept.
class IicAccumulator {
 public:
  explicit IicAccumulator(const IlluminantParams& p)
      : p_(p),
        n_intercepts_(std::max(1, static_cast<int>(std::lround(1.0 / p.intercept_bin)))),
        half_slopes_(static_cast<int>(std::lround(p.slope_range / p.slope_bin))),
        votes_(static_cast<std::size_t>(n_intercepts_) * (2 * half_slopes_ + 1), 0) {}

  // Mean chromaticity when the population is flat in this channel.
  std::optional<double> flat_mean(const std::vector<IicSample>& samples, int channel) const {
    double mean = 0, sq = 0;
    for (const auto& s : samples) mean += s.chroma[channel];
    mean /= double(samples.size());
    for (const auto& s : samples) sq += (s.chroma[channel] - mean) * (s.chroma[channel] - mean);
    if (std::sqrt(sq / double(samples.size())) < p_.flat_spread) return mean;
    return std::nullopt;
  }

  void vote(const std::vector<IicSample>& samples, int channel) {
    // Locals: stores through `row` would otherwise force member reloads.
    const int half = half_slopes_;
    const int n_k = n_intercepts_;
    const unsigned span = 2u * static_cast<unsigned>(half);
    const int width = 2 * half + 1;
    const double inv_bin = 1.0 / p_.slope_bin;
    const double ibin = p_.intercept_bin;
    int* const base = votes_.data();
    for (const auto& s : samples) {
      // Slope in bin units, stepped down by a constant per intercept bin.
      double u = (s.chroma[channel] - 0.5 * ibin) * s.total * inv_bin;
      const double du = ibin * s.total * inv_bin;
      int* row = base + half;
      for (int k = 0; k < n_k; ++k, u -= du, row += width) {
        const long bin = round_bin(u);
        if (bin == 0 || static_cast<unsigned long>(bin + half) > span) continue;
        if (row[bin]++ == 0) touched_.push_back(static_cast<int>(row + bin - base));
      }
    }
  }

  // Adds this accumulator's votes to another one.
  void merge_into(IicAccumulator& other) const {
    for (int c : touched_)
      if ((other.votes_[c] += votes_[c]) == votes_[c]) other.touched_.push_back(c);
  }

  void reset() {
    for (int c : touched_) votes_[c] = 0;
    touched_.clear();
  }

  // Intercept of the winning cell, refined by its voters; clears the votes.
  double finish(const std::vector<IicSample>& samples, int channel, double fallback) {
    int best_cell = -1;
    int best_votes = 0;
    for (int c : touched_) {
      const int v = votes_[c];
      if (v > best_votes || (v == best_votes && c < best_cell)) {
        best_votes = v;
        best_cell = c;
      }
    }
    reset();
    if (best_cell < 0) return fallback;

    const int width = 2 * half_slopes_ + 1;
    const double inv_bin = 1.0 / p_.slope_bin;
    const int k = best_cell / width;
    const long slope_bin = best_cell % width - half_slopes_;
    const double slope = double(slope_bin) * p_.slope_bin;
    const double gamma_k = (k + 0.5) * p_.intercept_bin;
    double sum = 0;
    int n = 0;
    for (const auto& s : samples) {
      const double u = (s.chroma[channel] - gamma_k) * s.total * inv_bin;
      if (round_bin(u) != slope_bin) continue;
      sum += s.chroma[channel] - slope / s.total;
      ++n;
    }
    const double refined = n ? sum / n : gamma_k;
    return std::clamp(refined, gamma_k - p_.intercept_bin / 2, gamma_k + p_.intercept_bin / 2);
  }

  double estimate(const std::vector<IicSample>& samples, int channel) {
    if (auto m = flat_mean(samples, channel)) return *m;
    vote(samples, channel);
    double mean = 0;
    for (const auto& s : samples) mean += s.chroma[channel];
    return finish(samples, channel, mean / double(samples.size()));
  }

 private:
  // floor(u + 0.5) by truncating a shifted positive value; |u| stays far below the shift.
  static long round_bin(double u) {
    constexpr double shift = 1 << 20;
    return static_cast<long>(u + 0.5 + shift) - (1L << 20);
  }

  IlluminantParams p_;
  int n_intercepts_;
  int half_slopes_;
  std::vector<int> votes_;
  std::vector<int> touched_;
};

inline Chromaticity normalise_chroma(Chromaticity g) {
  double sum = 0;
  for (auto& v : g) {
    v = std::max(0.0, v);
    sum += v;
  }
  if (!(sum > 0)) return {1.0 / 3, 1.0 / 3, 1.0 / 3};
  for (auto& v : g) v /= sum;
  return g;
}

}  // namespace detail

// Illuminant chromaticity of one pixel population; nullopt when fewer than
// min_pixels samples pass the intensity gates.
inline std::optional<Chromaticity> estimate_illuminant(const std::vector<IicSample>& samples,
                                                       const IlluminantParams& params = {}) {
  if (static_cast<int>(samples.size()) < params.min_pixels) return std::nullopt;
  detail::IicAccumulator acc(params);
  Chromaticity g{};
  for (int c = 0; c < 3; ++c) g[c] = acc.estimate(samples, c);
  return detail::normalise_chroma(g);
}

// Per-superpixel illuminant estimates. Regions with too few usable pixels
// inherit the whole-frame estimate, which itself defaults to neutral.
inline std::vector<Chromaticity> region_illuminants(const RgbImage& frame,
                                                    const SuperpixelGraph& g,
                                                    const IlluminantParams& params = {}) {
  if (frame.width() != g.width || frame.height() != g.height)
    throw internal_error("superpixel graph does not match frame size");
  std::vector<std::vector<IicSample>> per_region(g.size());
  std::vector<IicSample> all;
  for (int y = 0; y < frame.height(); ++y)
    for (int x = 0; x < frame.width(); ++x) {
      auto s = detail::iic_sample(frame.pixel(x, y), params);
      if (!s) continue;
      per_region[g.label(x, y)].push_back(*s);
      all.push_back(*s);
    }
  bool need_global = false;
  for (const auto& r : per_region)
    if (static_cast<int>(r.size()) < params.min_pixels) need_global = true;

  // The whole-frame vote is the sum of the region votes, so regions feed the
  // global accumulator instead of every pixel voting twice.
  std::vector<Chromaticity> out(g.size());
  Chromaticity global{};
  detail::IicAccumulator acc(params), global_acc(params);
  for (int ch = 0; ch < 3; ++ch) {
    for (std::size_t r = 0; r < g.size(); ++r) {
      const auto& samples = per_region[r];
      const bool usable = static_cast<int>(samples.size()) >= params.min_pixels;
      const auto flat = usable ? acc.flat_mean(samples, ch) : std::nullopt;
      if (flat) out[r][ch] = *flat;
      if (samples.empty() || (flat && !need_global) || (!usable && !need_global)) continue;
      acc.vote(samples, ch);
      if (need_global) acc.merge_into(global_acc);
      if (usable && !flat) {
        double mean = 0;
        for (const auto& s : samples) mean += s.chroma[ch];
        out[r][ch] = acc.finish(samples, ch, mean / double(samples.size()));
      } else {
        acc.reset();
      }
    }
    if (need_global && static_cast<int>(all.size()) >= params.min_pixels) {
      if (auto m = global_acc.flat_mean(all, ch)) {
        global[ch] = *m;
        global_acc.reset();
      } else {
        double mean = 0;
        for (const auto& s : all) mean += s.chroma[ch];
        global[ch] = global_acc.finish(all, ch, mean / double(all.size()));
      }
    } else {
      global_acc.reset();
    }
  }
  const Chromaticity neutral{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const Chromaticity global_n =
      static_cast<int>(all.size()) >= params.min_pixels ? detail::normalise_chroma(global) : neutral;
  for (std::size_t r = 0; r < g.size(); ++r)
    out[r] = static_cast<int>(per_region[r].size()) >= params.min_pixels
                 ? detail::normalise_chroma(out[r])
                 : global_n;
  return out;
}

inline PropertyMap estimate_illuminant_map(const RgbImage& frame, const SuperpixelGraph& g,
                                           int source_frame = 0,
                                           const IlluminantParams& params = {}) {
  const auto est = region_illuminants(frame, g, params);
  FloatImage out(g.width, g.height, 3);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      const auto& c = est[g.label(x, y)];
      const float r = static_cast<float>(c[0]), gg = static_cast<float>(c[1]);
      out.at(x, y, 0) = r;
      out.at(x, y, 1) = gg;
      // Third channel absorbs the float rounding so the sum stays at 1.
      out.at(x, y, 2) = std::max(0.0f, static_cast<float>(1.0 - double(r) - double(gg)));
    }
  return {PropertyKind::illuminant, std::move(out), source_frame};
}

// 8-bit RGB encoding used for illuminant map files (chromaticity * 255).
inline RgbImage illuminant_to_rgb(const FloatImage& chroma) {
  RgbImage out(chroma.width(), chroma.height(), 3);
  for (int y = 0; y < chroma.height(); ++y)
    for (int x = 0; x < chroma.width(); ++x)
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = static_cast<std::uint8_t>(
            std::clamp(std::lround(chroma.at(x, y, c) * 255.0), 0L, 255L));
  return out;
}

}  // namespace pad
