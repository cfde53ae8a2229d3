#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>

#include "oracles.hpp"
#include "pad/image/pfm_io.hpp"
#include "pad/propmaps/depth.hpp"
#include "pad/propmaps/illuminant.hpp"
#include "pad/propmaps/saliency.hpp"

using namespace pad;

namespace {

RgbImage solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RgbImage img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = r;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = b;
    }
  return img;
}

RgbImage noisy(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RgbImage img(w, h, 3);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng() % 256);
  return img;
}

}  // namespace

// ---- SLIC -----------------------------------------------------------------

TEST(Superpixels, UniformGrayGivesNearSquareGrid) {
  const auto g = segment_superpixels(solid(64, 64, 128, 128, 128), {16, 10.0, 10});
  ASSERT_EQ(g.size(), 16u);
  for (const auto& r : g.regions) {
    EXPECT_GE(r.pixel_count, 256 * 0.7);
    EXPECT_LE(r.pixel_count, 256 * 1.3);
  }
}

TEST(Superpixels, TwoToneRegionsDoNotStraddle) {
  RgbImage img = solid(64, 64, 30, 60, 200);
  for (int y = 0; y < 64; ++y)
    for (int x = 32; x < 64; ++x) {
      img.at(x, y, 0) = 220;
      img.at(x, y, 1) = 180;
      img.at(x, y, 2) = 20;
    }
  const auto g = segment_superpixels(img, {4, 10.0, 10});
  std::vector<int> left(g.size(), 0), total(g.size(), 0);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      ++total[g.label(x, y)];
      if (x < 32) ++left[g.label(x, y)];
    }
  for (std::size_t r = 0; r < g.size(); ++r) {
    const int minority = std::min(left[r], total[r] - left[r]);
    EXPECT_LE(minority, 0.05 * total[r]) << "region " << r;
  }
}

TEST(Superpixels, LabelsPartitionTheFrame) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto g = segment_superpixels(noisy(48, 40, seed), {20, 10.0, 10});
    ASSERT_EQ(g.labels.size(), 48u * 40u);
    std::vector<int> count(g.size(), 0);
    for (int l : g.labels) {
      ASSERT_GE(l, 0);
      ASSERT_LT(l, int(g.size()));
      ++count[l];
    }
    for (std::size_t r = 0; r < g.size(); ++r) {
      EXPECT_GT(count[r], 0);
      EXPECT_EQ(count[r], g.regions[r].pixel_count);
    }
  }
}

TEST(Superpixels, RejectsTinyFramesAndTargets) {
  EXPECT_THROW(segment_superpixels(solid(4, 4, 0, 0, 0), {200, 10.0, 10}), Error);
  EXPECT_THROW(segment_superpixels(solid(64, 64, 0, 0, 0), {3, 10.0, 10}), Error);
}

TEST(Superpixels, Deterministic) {
  const auto img = noisy(64, 64, 9);
  EXPECT_EQ(segment_superpixels(img).labels, segment_superpixels(img).labels);
}

// ---- boundary connectivity ------------------------------------------------

TEST(BoundaryConnectivity, SingleRegion) {
  const auto g = oracle::make_graph({true}, {});
  const auto bc = boundary_connectivity(g);
  EXPECT_NEAR(bc.bndcon[0], 1.0, 1e-9);
  EXPECT_NEAR(bc.w_bg[0], 1.0 - std::exp(-0.5), 1e-9);
  EXPECT_NEAR(bc.w_bg[0], 0.3935, 1e-4);
}

TEST(BoundaryConnectivity, ThreeRegionPathByHand) {
  const auto g = oracle::make_graph({true, false, false}, {{0, 1, 1.0}, {1, 2, 1.0}});
  BoundaryParams p;
  p.sigma_clr = 1.0;
  const auto bc = boundary_connectivity(g, p);
  const double e05 = std::exp(-0.5), e2 = std::exp(-2.0);
  const double area[3] = {1 + e05 + e2, 1 + 2 * e05, 1 + e05 + e2};
  const double len[3] = {1, e05, e2};
  for (int i = 0; i < 3; ++i) {
    const double b = len[i] / std::sqrt(area[i]);
    EXPECT_NEAR(bc.bndcon[i], b, 1e-9) << i;
    EXPECT_NEAR(bc.w_bg[i], 1 - std::exp(-b * b / 2), 1e-9) << i;
  }
  const auto geo = geodesic_distances(g);
  EXPECT_DOUBLE_EQ(geo[0][0], 0.0);
  EXPECT_DOUBLE_EQ(geo[0][1], 1.0);
  EXPECT_DOUBLE_EQ(geo[0][2], 2.0);
}

TEST(BoundaryConnectivity, ColourTwinAndIsolatedRegion) {
  // Regions 0-2 on the boundary; 3 matches them in colour; 4 is far from all.
  const auto g = oracle::make_graph({true, true, true, false, false},
                                    {{0, 1, 0.0}, {1, 2, 0.0}, {0, 2, 0.0}, {2, 3, 0.0},
                                     {3, 4, 200.0}, {1, 4, 200.0}});
  const auto bc = boundary_connectivity(g);
  for (int i = 0; i < 5; ++i) EXPECT_GE(bc.bndcon[3] + 1e-12, bc.bndcon[i]);
  EXPECT_LE(bc.w_bg[4], 0.05);
}

TEST(BoundaryConnectivity, DisconnectedGraphIsAnError) {
  const auto g = oracle::make_graph({true, false}, {});
  EXPECT_THROW(boundary_connectivity(g), Error);
}

TEST(Geodesics, MatchFloydWarshallAndTriangleInequality) {
  std::mt19937_64 rng(42);
  long triples = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = oracle::random_graph(rng, 3 + int(rng() % 20));
    const auto d = geodesic_distances(g);
    const auto ref = oracle::floyd_warshall(g);
    const int n = int(g.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ASSERT_NEAR(d[i][j], ref[i][j], 1e-9);
    for (int k = 0; k < 200; ++k, ++triples) {
      const int a = int(rng() % n), b = int(rng() % n), c = int(rng() % n);
      ASSERT_LE(d[a][c], d[a][b] + d[b][c] + 1e-9);
    }
  }
  EXPECT_EQ(triples, 10000);
}

TEST(Geodesics, RealSuperpixelGraphIsConnected) {
  const auto g = segment_superpixels(noisy(64, 64, 4), {30, 10.0, 10});
  const auto d = geodesic_distances(g);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(d[i][i], 0.0);
}

// ---- saliency ---------------------------------------------------------------

TEST(Saliency, TwoRegionClosedForm) {
  const auto s = solve_saliency({1, 0}, {0, 1}, {{0, 1, 0.1}});
  EXPECT_NEAR(s[0], 1.0 / 12, 1e-9);
  EXPECT_NEAR(s[1], 11.0 / 12, 1e-9);
  const auto gd = oracle::minimise_saliency({1, 0}, {0, 1}, {{0, 1, 0.1}});
  EXPECT_NEAR(gd[0], 1.0 / 12, 1e-9);
}

TEST(Saliency, AllForegroundIsExactlyOne) {
  const std::vector<SmoothnessEdge> e{{0, 1, 0.3}, {1, 2, 0.7}, {0, 3, 0.1}};
  const auto s = solve_saliency({0, 0, 0, 0}, {1, 1, 1, 1}, e);
  for (double v : s) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Saliency, MatchesGradientDescentOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + int(rng() % 5);
    std::vector<double> bg(n), fg(n);
    for (int i = 0; i < n; ++i) {
      bg[i] = u(rng);
      fg[i] = u(rng);
    }
    std::vector<SmoothnessEdge> e;
    for (int i = 1; i < n; ++i) e.push_back({int(rng() % i), i, u(rng) + 0.1});
    const auto s = solve_saliency(bg, fg, e);
    const auto ref = oracle::minimise_saliency(bg, fg, e);
    for (int i = 0; i < n; ++i) ASSERT_NEAR(s[i], ref[i], 1e-6) << "trial " << trial;
  }
}

TEST(Saliency, CostNotBeatenByPerturbation) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd(0, 1);
  const std::vector<double> bg{0.9, 0.2, 0.5, 0.1, 0.7}, fg{0.1, 0.8, 0.3, 1.0, 0.0};
  const std::vector<SmoothnessEdge> e{{0, 1, 0.4}, {1, 2, 1.1}, {2, 3, 0.2}, {3, 4, 0.6},
                                      {0, 4, 0.3}};
  const auto s = solve_saliency(bg, fg, e);
  const double best = saliency_cost(s, bg, fg, e);
  for (int k = 0; k < 100; ++k) {
    auto t = s;
    for (auto& v : t) v += 1e-3 * nd(rng);
    EXPECT_LE(best, saliency_cost(t, bg, fg, e));
  }
}

TEST(Saliency, MapIsInUnitRangeAndDeterministic) {
  const auto img = oracle::render_dichromatic(5, {0.4, 0.35, 0.25}, 96).image;
  const auto g = segment_superpixels(img, {60, 10.0, 10});
  const auto a = estimate_saliency_map(g);
  EXPECT_NO_THROW(validate_property_map(a));
  EXPECT_EQ(a.data, estimate_saliency_map(g).data);
}

// ---- illuminant -------------------------------------------------------------

TEST(Illuminant, RecoversKnownChromaticity) {
  const auto scene = oracle::render_dichromatic(3, {0.40, 0.35, 0.25});
  EXPECT_LE(oracle::illuminant_recovery_error(scene), 0.03);
  const auto g = segment_superpixels(scene.image);
  const auto est = region_illuminants(scene.image, g);
  std::vector<bool> lit(g.size(), false);
  for (auto [x, y] : scene.highlight_px) lit[g.label(x, y)] = true;
  std::array<double, 3> mean{};
  int n = 0;
  for (std::size_t r = 0; r < g.size(); ++r)
    if (lit[r]) {
      for (int c = 0; c < 3; ++c) mean[c] += est[r][c];
      ++n;
    }
  ASSERT_GT(n, 0);
  EXPECT_NEAR(mean[0] / n, 0.40, 0.03);
  EXPECT_NEAR(mean[1] / n, 0.35, 0.03);
  EXPECT_NEAR(mean[2] / n, 0.25, 0.03);
}

TEST(Illuminant, WhiteLightOnNeutralScene) {
  const double third = 1.0 / 3;
  const auto scene = oracle::render_dichromatic(8, {third, third, third}, 224, 4, true);
  const auto g = segment_superpixels(scene.image);
  const auto est = region_illuminants(scene.image, g);
  std::vector<bool> lit(g.size(), false);
  for (auto [x, y] : scene.highlight_px) lit[g.label(x, y)] = true;
  for (std::size_t r = 0; r < g.size(); ++r)
    if (lit[r])
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(est[r][c], third, 0.02) << "region " << r;
}

TEST(Illuminant, GreyPixelsGiveNeutral) {
  std::vector<IicSample> s;
  for (int i = 0; i < 50; ++i) {
    const double t = 0.3 + 0.04 * i;
    s.push_back({{1.0 / 3, 1.0 / 3, 1.0 / 3}, t});
  }
  const auto g = estimate_illuminant(s);
  ASSERT_TRUE(g.has_value());
  for (double v : *g) EXPECT_NEAR(v, 1.0 / 3, 1e-12);
  s.resize(15);
  EXPECT_FALSE(estimate_illuminant(s).has_value());
}

TEST(Illuminant, BlackFrameIsNeutralEverywhere) {
  const auto img = solid(64, 64, 0, 0, 0);
  const auto g = segment_superpixels(img, {16, 10.0, 10});
  for (const auto& c : region_illuminants(img, g))
    for (double v : c) EXPECT_DOUBLE_EQ(v, 1.0 / 3);
}

TEST(Illuminant, SmallRegionsInheritGlobalEstimate) {
  // Left half tinted and bright, right half too dark to pass the gate.
  RgbImage img = solid(64, 64, 2, 2, 2);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 32; ++x) {
      img.at(x, y, 0) = 200;
      img.at(x, y, 1) = 100;
      img.at(x, y, 2) = 100;
    }
  const auto g = segment_superpixels(img, {4, 10.0, 10});
  const auto est = region_illuminants(img, g);
  for (const auto& c : est) {
    EXPECT_NEAR(c[0], 0.5, 1e-3);
    EXPECT_NEAR(c[1], 0.25, 1e-3);
  }
}

TEST(Illuminant, ChannelsSumToOneAndDeterministic) {
  for (std::uint64_t seed : {1u, 2u}) {
    const auto img = noisy(96, 96, seed);
    const auto g = segment_superpixels(img, {50, 10.0, 10});
    const auto m = estimate_illuminant_map(img, g);
    EXPECT_NO_THROW(validate_property_map(m));
    for (int y = 0; y < 96; ++y)
      for (int x = 0; x < 96; ++x) {
        const double s = double(m.data.at(x, y, 0)) + m.data.at(x, y, 1) + m.data.at(x, y, 2);
        ASSERT_NEAR(s, 1.0, 1e-6);
      }
    EXPECT_EQ(m.data, estimate_illuminant_map(img, g).data);
  }
}

// ---- depth and PFM ----------------------------------------------------------

TEST(Pfm, RoundTripIsBitExact) {
  oracle::TempDir tmp;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-1e6f, 1e6f);
  for (int ch : {1, 3}) {
    FloatImage img(7, 5, ch);
    for (auto& v : img.data()) v = u(rng);
    img.data()[0] = std::numeric_limits<float>::denorm_min();
    const auto p = tmp.path / ("m" + std::to_string(ch) + ".pfm");
    write_pfm(p, img);
    EXPECT_EQ(read_pfm(p), img);
  }
}

TEST(Pfm, RowsAreStoredBottomUp) {
  oracle::TempDir tmp;
  FloatImage img(1, 2, 1);
  img.at(0, 0) = 1.0f;
  img.at(0, 1) = 2.0f;
  write_pfm(tmp.path / "r.pfm", img);
  std::ifstream in(tmp.path / "r.pfm", std::ios::binary);
  std::string magic, scale;
  int w, h;
  in >> magic >> w >> h >> scale;
  in.get();
  float first;
  in.read(reinterpret_cast<char*>(&first), 4);
  EXPECT_EQ(magic, "Pf");
  EXPECT_LT(std::stod(scale), 0);
  EXPECT_EQ(first, 2.0f);
}

TEST(Depth, PrecomputedIsRescaledToUnitRange) {
  oracle::TempDir tmp;
  FloatImage raw(4, 4, 1);
  for (int i = 0; i < 16; ++i) raw.data()[i] = 2.0f + 6.0f * i / 15.0f;
  std::filesystem::create_directories(tmp.path / "s1");
  write_pfm(tmp.path / "s1" / "0.pfm", raw);
  DepthProviderConfig cfg;
  cfg.mode = DepthMode::precomputed;
  cfg.path_template = (tmp.path / "{sample_id}" / "{index}.pfm").string();
  const auto m = provide_depth_map("s1", 0, cfg, 4);
  const auto [lo, hi] = std::minmax_element(m.data.data().begin(), m.data.data().end());
  EXPECT_EQ(*lo, 0.0f);
  EXPECT_EQ(*hi, 1.0f);
  EXPECT_NO_THROW(validate_property_map(m));
}

TEST(Depth, ConstantProviderAndConstantFile) {
  DepthProviderConfig cfg;
  const auto m = provide_depth_map("x", 3, cfg, 224);
  EXPECT_EQ(m.data.width(), 224);
  for (float v : m.data.data()) EXPECT_EQ(v, 0.5f);
  EXPECT_EQ(m.source_frame, 3);
  const auto flat = rescale_unit(FloatImage(3, 3, 1, 7.0f));
  for (float v : flat.data()) EXPECT_EQ(v, 0.5f);
}

TEST(Depth, ExternalRampIsBitExact) {
  oracle::TempDir tmp;
  FloatImage ramp(16, 16, 1);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) ramp.at(x, y) = float(x + 16 * y) / 255.0f;
  write_pfm(tmp.path / "ramp.pfm", ramp);
  DepthProviderConfig cfg;
  cfg.mode = DepthMode::external;
  cfg.command_template = "cp '" + (tmp.path / "ramp.pfm").string() + "' {output}";
  const auto m = provide_depth_map("s", 0, cfg, 16, tmp.path / "frame.png");
  EXPECT_EQ(m.data, ramp);
}

TEST(Depth, ExternalFailureAndMissingFile) {
  DepthProviderConfig cfg;
  cfg.mode = DepthMode::external;
  cfg.command_template = "false";
  EXPECT_THROW(provide_depth_map("s", 0, cfg, 8), Error);
  cfg.mode = DepthMode::precomputed;
  cfg.path_template = "/nonexistent/{sample_id}.pfm";
  EXPECT_THROW(provide_depth_map("s", 0, cfg, 8), Error);
}

TEST(Depth, SizeMismatchResizesOrFailsUnderStrict) {
  oracle::TempDir tmp;
  FloatImage raw(8, 8, 1);
  for (int i = 0; i < 64; ++i) raw.data()[i] = float(i);
  const auto p = tmp.path / "d.pfm";
  write_pfm(p, raw);
  const auto m = load_depth_file(p, 16, 0, false);
  EXPECT_EQ(m.data.width(), 16);
  try {
    load_depth_file(p, 16, 0, true);
    FAIL() << "strict mode accepted a mis-sized map";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_NE(std::string(e.what()).find(p.string()), std::string::npos);
  }
}
