#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "pad/propmaps/superpixels.hpp"

namespace pad {

struct BoundaryParams {
  double sigma_clr = 10.0;  // CIE-Lab units
  double sigma_bnd = 1.0;
};

struct BoundaryConnectivity {
  std::vector<double> bndcon;
  std::vector<double> w_bg;  // background probability per region
};

// All-pairs shortest paths over the region graph (Dijkstra from every node).
inline std::vector<std::vector<double>> geodesic_distances(const SuperpixelGraph& g) {
  const std::size_t n = g.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, inf));
  using Item = std::pair<double, int>;
  for (std::size_t src = 0; src < n; ++src) {
    auto& d = dist[src];
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    d[src] = 0;
    pq.push({0.0, static_cast<int>(src)});
    while (!pq.empty()) {
      auto [du, u] = pq.top();
      pq.pop();
      if (du > d[u]) continue;
      for (const auto& e : g.adjacency[u]) {
        const double nd = du + e.weight;
        if (nd < d[e.to]) {
          d[e.to] = nd;
          pq.push({nd, e.to});
        }
      }
    }
    for (std::size_t q = 0; q < n; ++q)
      if (!std::isfinite(d[q])) throw internal_error("superpixel graph is disconnected");
  }
  return dist;
}

inline BoundaryConnectivity boundary_connectivity(const SuperpixelGraph& g,
                                                  const BoundaryParams& params = {}) {
  const auto geo = geodesic_distances(g);
  const std::size_t n = g.size();
  const double two_clr = 2.0 * params.sigma_clr * params.sigma_clr;
  const double two_bnd = 2.0 * params.sigma_bnd * params.sigma_bnd;
  BoundaryConnectivity out;
  out.bndcon.resize(n);
  out.w_bg.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    double area = 0, len = 0;
    for (std::size_t q = 0; q < n; ++q) {
      const double s = std::exp(-geo[p][q] * geo[p][q] / two_clr);
      area += s;
      if (g.regions[q].touches_boundary) len += s;
    }
    out.bndcon[p] = len / std::sqrt(area);
    out.w_bg[p] = 1.0 - std::exp(-out.bndcon[p] * out.bndcon[p] / two_bnd);
  }
  return out;
}

}  // namespace pad
