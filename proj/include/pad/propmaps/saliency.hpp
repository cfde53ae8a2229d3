#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "pad/propmaps/boundary.hpp"
#include "pad/propmaps/property_map.hpp"

namespace pad {

struct SaliencyParams {
  BoundaryParams boundary;
  double sigma_spa = 0.25;  // fraction of the image diagonal
  double mu = 0.1;
};

struct SmoothnessEdge {
  int p = 0;
  int q = 0;
  double weight = 0;  // w_pq, already including mu
};

// Cost of a saliency assignment:
//   sum w_bg s^2 + sum w_fg (s - 1)^2 + sum_edges w_pq (s_p - s_q)^2
inline double saliency_cost(const std::vector<double>& s, const std::vector<double>& w_bg,
                            const std::vector<double>& w_fg,
                            const std::vector<SmoothnessEdge>& edges) {
  double cost = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    cost += w_bg[i] * s[i] * s[i] + w_fg[i] * (s[i] - 1) * (s[i] - 1);
  for (const auto& e : edges) cost += e.weight * (s[e.p] - s[e.q]) * (s[e.p] - s[e.q]);
  return cost;
}

// Minimises saliency_cost exactly: the stationarity condition is the SPD
// system (diag(w_bg + w_fg) + L) s = w_fg with L the weighted Laplacian.
// Returns the unclamped minimiser.
inline std::vector<double> solve_saliency(const std::vector<double>& w_bg,
                                          const std::vector<double>& w_fg,
                                          const std::vector<SmoothnessEdge>& edges) {
  const auto n = static_cast<Eigen::Index>(w_bg.size());
  if (w_fg.size() != w_bg.size()) throw internal_error("saliency weight size mismatch");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = w_bg[i] + w_fg[i];
    b(i) = w_fg[i];
  }
  for (const auto& e : edges) {
    a(e.p, e.p) += e.weight;
    a(e.q, e.q) += e.weight;
    a(e.p, e.q) -= e.weight;
    a(e.q, e.p) -= e.weight;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw internal_error("saliency system is not positive definite");
  Eigen::VectorXd s = llt.solve(b);
  if ((a * s - b).lpNorm<Eigen::Infinity>() > 1e-8) {
    // One step of iterative refinement.
    s += llt.solve(b - a * s);
    if ((a * s - b).lpNorm<Eigen::Infinity>() > 1e-8)
      throw internal_error("saliency solve residual above 1e-8");
  }
  return {s.data(), s.data() + n};
}

// Contrast against the (background-weighted) rest of the image, spatially
// localised. Returned normalised to [0, 1].
inline std::vector<double> foreground_weights(const SuperpixelGraph& g,
                                              const std::vector<double>& w_bg,
                                              double sigma_spa) {
  const std::size_t n = g.size();
  const double diag = std::hypot(double(g.width), double(g.height));
  const double two_spa = 2 * sigma_spa * sigma_spa;
  std::vector<double> ctr(n, 0.0);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      const double ds =
          std::hypot(g.regions[p].cx - g.regions[q].cx, g.regions[p].cy - g.regions[q].cy) / diag;
      ctr[p] += g.appearance_distance(int(p), int(q)) * std::exp(-ds * ds / two_spa) * w_bg[q];
    }
  const auto [lo, hi] = std::minmax_element(ctr.begin(), ctr.end());
  const double range = *hi - *lo;
  std::vector<double> out(n, 0.0);
  if (range > 1e-12)
    for (std::size_t p = 0; p < n; ++p) out[p] = (ctr[p] - *lo) / range;
  return out;
}

inline std::vector<SmoothnessEdge> smoothness_edges(const SuperpixelGraph& g, double sigma_clr,
                                                    double mu) {
  std::vector<SmoothnessEdge> edges;
  const double two_clr = 2 * sigma_clr * sigma_clr;
  for (std::size_t p = 0; p < g.size(); ++p)
    for (const auto& e : g.adjacency[p])
      if (static_cast<std::size_t>(e.to) > p)
        edges.push_back({int(p), e.to, std::exp(-e.weight * e.weight / two_clr) + mu});
  return edges;
}

inline std::vector<double> region_saliency(const SuperpixelGraph& g,
                                           const SaliencyParams& params = {}) {
  const auto bc = boundary_connectivity(g, params.boundary);
  const auto w_fg = foreground_weights(g, bc.w_bg, params.sigma_spa);
  auto s = solve_saliency(bc.w_bg, w_fg,
                          smoothness_edges(g, params.boundary.sigma_clr, params.mu));
  for (auto& v : s) v = std::clamp(v, 0.0, 1.0);
  return s;
}

inline FloatImage paint_regions(const SuperpixelGraph& g, const std::vector<double>& values) {
  FloatImage out(g.width, g.height, 1);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) out.at(x, y) = static_cast<float>(values[g.label(x, y)]);
  return out;
}

inline PropertyMap estimate_saliency_map(const SuperpixelGraph& g, int source_frame = 0,
                                         const SaliencyParams& params = {}) {
  return {PropertyKind::saliency, paint_regions(g, region_saliency(g, params)), source_frame};
}

}  // namespace pad
