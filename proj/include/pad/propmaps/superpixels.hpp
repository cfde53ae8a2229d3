#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "pad/image/color.hpp"

namespace pad {

struct SlicParams {
  int target_count = 200;
  double compactness = 10.0;
  int iterations = 10;
};

struct Region {
  Lab mean_lab{};
  double cx = 0, cy = 0;  // centroid
  int pixel_count = 0;
  bool touches_boundary = false;
};

struct GraphEdge {
  int to = 0;
  double weight = 0;  // CIE-Lab distance between region means
};

// Region adjacency graph over a superpixel partition. Border regions are
// additionally linked to each other so geodesics can run along the frame edge.
struct SuperpixelGraph {
  int width = 0;
  int height = 0;
  std::vector<int> labels;  // row-major, one region index per pixel
  std::vector<Region> regions;
  std::vector<std::vector<GraphEdge>> adjacency;

  std::size_t size() const { return regions.size(); }
  int label(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  double appearance_distance(int p, int q) const {
    return lab_distance(regions[p].mean_lab, regions[q].mean_lab);
  }
};

namespace detail {

// Splits labels into 4-connected components; returns component id per pixel.
inline int connected_components(const std::vector<int>& labels, int w, int h,
                                 std::vector<int>& comp) {
  comp.assign(labels.size(), -1);
  int next = 0;
  std::vector<int> stack;
  for (int start = 0; start < w * h; ++start) {
    if (comp[start] >= 0) continue;
    comp[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int x = p % w, y = p / w;
      const int nbr[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& n : nbr) {
        if (n[0] < 0 || n[1] < 0 || n[0] >= w || n[1] >= h) continue;
        const int q = n[1] * w + n[0];
        if (comp[q] < 0 && labels[q] == labels[start]) {
          comp[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
  }
  return next;
}

// Keeps the largest component of every label; every other component is an
// orphan and is absorbed by its largest adjacent region. Output labels are
// compact and numbered in raster order of first appearance.
inline std::vector<int> enforce_connectivity(const std::vector<int>& labels, int w, int h) {
  std::vector<int> comp;
  const int ncomp = connected_components(labels, w, h, comp);
  std::vector<int> size(ncomp, 0), comp_label(ncomp, -1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++size[comp[i]];
    comp_label[comp[i]] = labels[i];
  }
  std::map<int, int> best;  // label -> its largest component
  for (int c = 0; c < ncomp; ++c) {
    if (comp_label[c] < 0) continue;
    auto it = best.find(comp_label[c]);
    if (it == best.end() || size[c] > size[it->second]) best[comp_label[c]] = c;
  }
  std::vector<int> owner(ncomp, -1);  // final component each component merges into
  for (const auto& [_, c] : best) owner[c] = c;

  std::vector<std::set<int>> nbrs(ncomp);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int a = comp[y * w + x];
      if (x + 1 < w && comp[y * w + x + 1] != a) {
        nbrs[a].insert(comp[y * w + x + 1]);
        nbrs[comp[y * w + x + 1]].insert(a);
      }
      if (y + 1 < h && comp[(y + 1) * w + x] != a) {
        nbrs[a].insert(comp[(y + 1) * w + x]);
        nbrs[comp[(y + 1) * w + x]].insert(a);
      }
    }
  std::vector<int> owned_size(ncomp, 0);
  for (int c = 0; c < ncomp; ++c)
    if (owner[c] == c) owned_size[c] = size[c];

  bool pending = true;
  while (pending) {
    pending = false;
    bool progress = false;
    for (int c = 0; c < ncomp; ++c) {
      if (owner[c] >= 0) continue;
      int target = -1;
      for (int n : nbrs[c]) {
        if (owner[n] < 0) continue;
        const int f = owner[n];
        if (target < 0 || owned_size[f] > owned_size[target] ||
            (owned_size[f] == owned_size[target] && f < target))
          target = f;
      }
      if (target < 0) {
        pending = true;
        continue;
      }
      owner[c] = target;
      owned_size[target] += size[c];
      progress = true;
    }
    if (pending && !progress) break;  // isolated orphan ring; cannot happen on a grid
  }

  std::vector<int> remap(ncomp, -1);
  std::vector<int> out(labels.size());
  int next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int f = owner[comp[i]];
    if (f < 0) f = comp[i];
    if (remap[f] < 0) remap[f] = next++;
    out[i] = remap[f];
  }
  return out;
}

}  // namespace detail

// Builds the region graph for a given partition of `lab`.
inline SuperpixelGraph build_superpixel_graph(const Image<double>& lab, std::vector<int> labels) {
  const int w = lab.width(), h = lab.height();
  SuperpixelGraph g;
  g.width = w;
  g.height = h;
  const int n = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  g.regions.assign(n, Region{});
  std::vector<std::array<double, 3>> sum(n, {0, 0, 0});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int l = labels[y * w + x];
      auto& r = g.regions[l];
      for (int c = 0; c < 3; ++c) sum[l][c] += lab.at(x, y, c);
      r.cx += x;
      r.cy += y;
      ++r.pixel_count;
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1) r.touches_boundary = true;
    }
  for (int l = 0; l < n; ++l) {
    auto& r = g.regions[l];
    if (r.pixel_count == 0) throw internal_error("empty superpixel");
    for (int c = 0; c < 3; ++c) r.mean_lab[c] = sum[l][c] / r.pixel_count;
    r.cx /= r.pixel_count;
    r.cy /= r.pixel_count;
  }
  std::vector<std::set<int>> nb(n);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int a = labels[y * w + x];
      if (x + 1 < w && labels[y * w + x + 1] != a) {
        nb[a].insert(labels[y * w + x + 1]);
        nb[labels[y * w + x + 1]].insert(a);
      }
      if (y + 1 < h && labels[(y + 1) * w + x] != a) {
        nb[a].insert(labels[(y + 1) * w + x]);
        nb[labels[(y + 1) * w + x]].insert(a);
      }
    }
  for (int a = 0; a < n; ++a) {
    if (!g.regions[a].touches_boundary) continue;
    for (int b = 0; b < n; ++b)
      if (b != a && g.regions[b].touches_boundary) nb[a].insert(b);
  }
  g.adjacency.resize(n);
  for (int a = 0; a < n; ++a)
    for (int b : nb[a])
      g.adjacency[a].push_back({b, lab_distance(g.regions[a].mean_lab, g.regions[b].mean_lab)});
  g.labels = std::move(labels);
  return g;
}

// SLIC: k-means in (L, a, b, x, y) seeded on a regular grid, followed by
// connectivity enforcement. Deterministic: seeding involves no randomness.
inline SuperpixelGraph segment_superpixels(const RgbImage& frame, const SlicParams& params = {}) {
  const int w = frame.width(), h = frame.height();
  const long npix = static_cast<long>(w) * h;
  if (params.target_count < 4) throw data_error("superpixel target_count must be >= 4");
  if (npix < params.target_count)
    throw data_error("frame has fewer pixels than the superpixel target count");

  const auto lab = to_lab(frame);
  const double step = std::sqrt(double(npix) / params.target_count);
  const int nx = std::max(1, static_cast<int>(std::lround(w / step)));
  const int ny = std::max(1, static_cast<int>(std::lround(h / step)));
  const double sx = double(w) / nx, sy = double(h) / ny;
  const double search = std::max(sx, sy);

  struct Center {
    double l, a, b, x, y;
  };
  std::vector<Center> centers;
  auto gradient = [&](int x, int y) {
    x = std::clamp(x, 1, w - 2);
    y = std::clamp(y, 1, h - 2);
    double g = 0;
    for (int c = 0; c < 3; ++c) {
      const double dx = lab.at(x + 1, y, c) - lab.at(x - 1, y, c);
      const double dy = lab.at(x, y + 1, c) - lab.at(x, y - 1, c);
      g += dx * dx + dy * dy;
    }
    return g;
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int x = std::min(w - 1, static_cast<int>((i + 0.5) * sx));
      int y = std::min(h - 1, static_cast<int>((j + 0.5) * sy));
      if (w >= 3 && h >= 3) {
        int bx = x, by = y;
        double bg = gradient(x, y);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx, yy = y + dy;
            if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
            const double gg = gradient(xx, yy);
            if (gg < bg) {
              bg = gg;
              bx = xx;
              by = yy;
            }
          }
        x = bx;
        y = by;
      }
      centers.push_back({lab.at(x, y, 0), lab.at(x, y, 1), lab.at(x, y, 2), double(x), double(y)});
    }

  const double spatial = (params.compactness / search) * (params.compactness / search);
  std::vector<int> labels(static_cast<std::size_t>(npix), -1);
  std::vector<double> dist(static_cast<std::size_t>(npix));
  for (int it = 0; it < params.iterations; ++it) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const auto& c = centers[k];
      const int x0 = std::max(0, static_cast<int>(std::floor(c.x - search)));
      const int x1 = std::min(w - 1, static_cast<int>(std::ceil(c.x + search)));
      const int y0 = std::max(0, static_cast<int>(std::floor(c.y - search)));
      const int y1 = std::min(h - 1, static_cast<int>(std::ceil(c.y + search)));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const double dl = lab.at(x, y, 0) - c.l, da = lab.at(x, y, 1) - c.a,
                       db = lab.at(x, y, 2) - c.b;
          const double ddx = x - c.x, ddy = y - c.y;
          const double d = dl * dl + da * da + db * db + (ddx * ddx + ddy * ddy) * spatial;
          const std::size_t p = static_cast<std::size_t>(y) * w + x;
          if (d < dist[p]) {
            dist[p] = d;
            labels[p] = static_cast<int>(k);
          }
        }
    }
    std::vector<Center> acc(centers.size(), Center{0, 0, 0, 0, 0});
    std::vector<long> cnt(centers.size(), 0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int l = labels[static_cast<std::size_t>(y) * w + x];
        if (l < 0) continue;
        acc[l].l += lab.at(x, y, 0);
        acc[l].a += lab.at(x, y, 1);
        acc[l].b += lab.at(x, y, 2);
        acc[l].x += x;
        acc[l].y += y;
        ++cnt[l];
      }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (cnt[k] == 0) continue;
      const double n = double(cnt[k]);
      centers[k] = {acc[k].l / n, acc[k].a / n, acc[k].b / n, acc[k].x / n, acc[k].y / n};
    }
  }
  return build_superpixel_graph(lab, detail::enforce_connectivity(labels, w, h));
}

}  // namespace pad
