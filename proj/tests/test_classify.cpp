#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "pad/classify/fusion.hpp"
#include "pad/classify/model_io.hpp"

using namespace pad;

namespace {

using Points = std::vector<std::vector<double>>;

struct Dataset {
  Points x;
  std::vector<int> y;
};

Dataset random_dataset(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> nd(0, 1);
  Dataset d;
  const int n = 4 + int(rng() % 17);
  for (int i = 0; i < n; ++i) {
    const int label = i % 2 ? 1 : -1;
    std::vector<double> p(dim);
    for (auto& v : p) v = nd(rng) + 0.8 * label;
    d.x.push_back(p);
    d.y.push_back(label);
  }
  return d;
}

FeatureVector frame(const std::string& id, PropertyKind k, std::vector<float> v,
                    const std::string& extractor = "fallback-v1") {
  FeatureVector f;
  f.values = std::move(v);
  f.kind = k;
  f.sample_id = id;
  f.extractor_id = extractor;
  return f;
}

}  // namespace

// ---- SVM ------------------------------------------------------------------

TEST(Svm, TwoPointLinearMidway) {
  SvmParams p;
  p.kernel = KernelType::linear;
  const auto m = svm_train({{0, 0}, {1, 1}}, {-1, 1}, p);
  EXPECT_LT(decision_value(m, {0, 0}), 0);
  EXPECT_GT(decision_value(m, {1, 1}), 0);
  EXPECT_NEAR(decision_value(m, {0.5, 0.5}), 0.0, 1e-6);
}

TEST(Svm, XorWithRbf) {
  SvmParams p;
  p.gamma = 1.0;
  p.c = 10.0;
  const Points x{{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<int> y{-1, -1, 1, 1};
  const auto m = svm_train(x, y, p);
  for (std::size_t i = 0; i < x.size(); ++i)
    EXPECT_EQ(decision_value(m, x[i]) > 0 ? 1 : -1, y[i]) << i;
}

TEST(Svm, MatchesDualQpOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + trial % 2;
    const auto d = random_dataset(rng, dim);
    SvmParams p;
    p.kernel = trial % 3 == 0 ? KernelType::linear : KernelType::rbf;
    p.gamma = 0.5;
    p.tol = 1e-8;
    const auto m = svm_train(d.x, d.y, p);
    const auto ref = oracle::solve_dual(d.x, d.y, p.c, p.kernel, p.gamma);
    for (const auto& pt : d.x) {
      const double a = decision_value(m, pt);
      const double b = oracle::dual_decision(ref, d.x, d.y, p.kernel, p.gamma, pt);
      ASSERT_NEAR(a, b, 1e-4) << "trial " << trial;
    }
  }
}

TEST(Svm, DualFeasibility) {
  std::mt19937_64 rng(5);
  const auto d = random_dataset(rng, 3);
  SvmParams p;
  p.c = 2.0;
  const auto m = svm_train(d.x, d.y, p);
  double sum = 0;
  for (double a : m.dual_coefs) {
    EXPECT_LE(std::abs(a), p.c + 1e-12);
    sum += a;
  }
  EXPECT_NEAR(sum, 0.0, 1e-9);
  EXPECT_LE(m.kkt_gap, p.tol);
}

TEST(Svm, InputErrors) {
  EXPECT_THROW(svm_train({{0.0}, {1.0}}, {1, 1}), Error);
  EXPECT_THROW(svm_train({{0.0}, {1.0, 2.0}}, {1, -1}), Error);
  EXPECT_THROW(svm_train({}, {}), Error);
  const auto m = svm_train({{0.0}, {1.0}}, {-1, 1});
  EXPECT_THROW(decision_value(m, {1.0, 2.0}), Error);
}

TEST(Svm, DeterministicAndClassWeights) {
  std::mt19937_64 rng(8);
  auto d = random_dataset(rng, 2);
  d.x.push_back({3, 3});
  d.y.push_back(1);
  SvmParams p;
  p.class_weights = true;
  const auto a = svm_train(d.x, d.y, p), b = svm_train(d.x, d.y, p);
  EXPECT_EQ(a.dual_coefs, b.dual_coefs);
  EXPECT_EQ(a.bias, b.bias);
}

// ---- Platt ------------------------------------------------------------------

TEST(Platt, SymmetricScoresGiveHalfAtZero) {
  std::vector<double> s;
  std::vector<int> l;
  for (double v : {0.3, 0.8, 1.2, 2.0, 0.5}) {
    s.push_back(v);
    l.push_back(1);
    s.push_back(-v);
    l.push_back(-1);
  }
  const auto f = fit_platt(s, l);
  EXPECT_NEAR(platt_probability(f.a, f.b, 0.0), 0.5, 0.02);
  EXPECT_LT(f.a, 0);
  EXPECT_LE(f.iterations, 100);
}

TEST(Platt, Monotone) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0, 1);
  std::vector<double> s;
  std::vector<int> l;
  for (int i = 0; i < 60; ++i) {
    const int y = i % 2 ? 1 : -1;
    s.push_back(nd(rng) + y);
    l.push_back(y);
  }
  const auto f = fit_platt(s, l);
  double prev = 0;
  for (double v = -5; v <= 5; v += 0.01) {
    const double p = platt_probability(f.a, f.b, v);
    EXPECT_GE(p, prev);
    prev = p;
  }
}

TEST(Platt, TwoPointExampleRecoversLabels) {
  SvmParams p;
  p.kernel = KernelType::linear;
  const Points x{{0, 0}, {1, 1}};
  auto m = svm_train(x, {-1, 1}, p);
  platt_calibrate(m, {decision_value(m, x[0]), decision_value(m, x[1])}, {-1, 1});
  EXPECT_LT(predict_probability(m, x[0]), 0.5);
  EXPECT_GT(predict_probability(m, x[1]), 0.5);
}

TEST(Platt, Errors) {
  EXPECT_THROW(fit_platt({1, 2}, {1, 1}), Error);
  EXPECT_THROW(fit_platt({}, {}), Error);
  SvmModel m;
  m.input_dim = 1;
  EXPECT_THROW(predict_probability(m, {0.0}), Error);
}

TEST(Platt, ExtremeScoresStayFinite) {
  for (double s : {-1e6, -700.0, 0.0, 700.0, 1e6}) {
    const double p = platt_probability(-3.0, 0.1, s);
    EXPECT_TRUE(std::isfinite(p));
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

// ---- frame probabilities ------------------------------------------------------

TEST(FrameProbabilities, HandBuiltModel) {
  SvmModel m;
  m.kernel = KernelType::rbf;
  m.gamma = 0.5;
  m.input_dim = 2;
  m.support_vectors = {{1.0, 2.0}};
  m.dual_coefs = {0.75};
  m.bias = -0.2;
  m.platt_a = -1.7;
  m.platt_b = 0.3;
  m.calibrated = true;
  m.role = ModelRole::illuminant;
  m.extractor_id = "fallback-v1";
  const auto s =
      predict_frame_probabilities(m, {frame("a", PropertyKind::illuminant, {0.5f, 1.5f})});
  ASSERT_EQ(s.probs.size(), 1u);
  const double f = 0.75 * std::exp(-0.5 * (0.25 + 0.25)) - 0.2;
  EXPECT_NEAR(s.probs[0], 1.0 / (1.0 + std::exp(-1.7 * f + 0.3)), 1e-9);
}

TEST(FrameProbabilities, DuplicatesAndMismatches) {
  SvmModel m;
  m.kernel = KernelType::linear;
  m.input_dim = 1;
  m.support_vectors = {{1.0}};
  m.dual_coefs = {1.0};
  m.platt_a = -1;
  m.calibrated = true;
  m.role = ModelRole::depth;
  m.extractor_id = "fallback-v1";
  const auto f = frame("a", PropertyKind::depth, {0.3f});
  const auto s = predict_frame_probabilities(m, {f, f, f});
  ASSERT_EQ(s.probs.size(), 3u);
  EXPECT_EQ(s.probs[0], s.probs[1]);
  EXPECT_EQ(s.probs[1], s.probs[2]);
  EXPECT_THROW(predict_frame_probabilities(m, {frame("a", PropertyKind::saliency, {0.3f})}), Error);
  EXPECT_THROW(predict_frame_probabilities(m, {frame("a", PropertyKind::depth, {0.3f}, "other")}),
               Error);
  EXPECT_THROW(predict_frame_probabilities(m, {}), Error);
  EXPECT_THROW(predict_frame_probabilities(m, {f, frame("b", PropertyKind::depth, {0.3f})}), Error);
}

// ---- pfv and voting -----------------------------------------------------------

TEST(Pfv, MeansPerProperty) {
  const auto pfv = assemble_pfv({{"s", PropertyKind::saliency, {0.5, 0.5}},
                                 {"s", PropertyKind::depth, {0.2, 0.4, 0.9}},
                                 {"s", PropertyKind::illuminant, {0.5}}});
  EXPECT_EQ(pfv.p_depth, 0.5);
  EXPECT_EQ(pfv.p_illuminant, 0.5);
  EXPECT_EQ(pfv.p_saliency, 0.5);
  EXPECT_EQ(pfv.values(), (std::vector<double>{0.5, 0.5, 0.5}));
  EXPECT_EQ(pfv.sample_id, "s");
}

TEST(Pfv, MatchesCompensatedSummation) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<FrameProbabilitySeries> series;
    for (auto k : kAllProperties) {
      FrameProbabilitySeries s{"x", k, {}};
      for (int i = 0; i < 7; ++i) s.probs.push_back(u(rng));
      series.push_back(s);
    }
    const auto pfv = assemble_pfv(series);
    EXPECT_NEAR(pfv.p_depth, oracle::kahan_mean(series[0].probs), 1e-12);
    EXPECT_NEAR(pfv.p_illuminant, oracle::kahan_mean(series[1].probs), 1e-12);
    EXPECT_NEAR(pfv.p_saliency, oracle::kahan_mean(series[2].probs), 1e-12);
  }
}

TEST(Pfv, Errors) {
  EXPECT_THROW(assemble_pfv({{"s", PropertyKind::depth, {0.1}}, {"s", PropertyKind::saliency, {0.1}}}),
               Error);
  EXPECT_THROW(assemble_pfv({{"s", PropertyKind::depth, {}},
                             {"s", PropertyKind::illuminant, {0.1}},
                             {"s", PropertyKind::saliency, {0.1}}}),
               Error);
  EXPECT_THROW(assemble_pfv({{"s", PropertyKind::depth, {0.1}},
                             {"t", PropertyKind::illuminant, {0.1}},
                             {"s", PropertyKind::saliency, {0.1}}}),
               Error);
}

TEST(MajorityVote, Examples) {
  EXPECT_EQ(majority_vote_video({"a", PropertyKind::depth, {0.9, 0.8, 0.1}}), Label::attack);
  EXPECT_EQ(majority_vote_video({"a", PropertyKind::depth, {0.4}}), Label::bonafide);
  EXPECT_EQ(majority_vote_video({"a", PropertyKind::depth, {0.9, 0.1}}), Label::attack);
  EXPECT_EQ(majority_vote_video({"a", PropertyKind::depth, {0.5}}), Label::bonafide);
  EXPECT_EQ(majority_vote_video({"a", PropertyKind::depth, {0.6}}, 0.7), Label::bonafide);
  EXPECT_THROW(majority_vote_video({"a", PropertyKind::depth, {}}), Error);
}

// ---- fusion -------------------------------------------------------------------

TEST(Fusion, SeparableClusters) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0, 0.04);
  auto cluster = [&](double c, int n) {
    std::vector<ProbabilityFeatureVector> v;
    for (int i = 0; i < n; ++i)
      v.push_back({"p" + std::to_string(i), c + nd(rng), c + nd(rng), c + nd(rng)});
    return v;
  };
  auto train = cluster(0.9, 20), neg = cluster(0.1, 20);
  std::vector<int> y(20, 1);
  train.insert(train.end(), neg.begin(), neg.end());
  y.insert(y.end(), 20, -1);
  auto dev = cluster(0.9, 10), dneg = cluster(0.1, 10);
  std::vector<int> dy(10, 1);
  dev.insert(dev.end(), dneg.begin(), dneg.end());
  dy.insert(dy.end(), 10, -1);
  const auto m = train_fusion_classifier(train, y, dev, dy, {});
  EXPECT_EQ(m.role, ModelRole::fusion);
  EXPECT_EQ(m.kernel, KernelType::rbf);
  int correct = 0;
  auto test = cluster(0.9, 25), tneg = cluster(0.1, 25);
  for (const auto& p : test) correct += predict_probability(m, p.values()) > 0.5;
  for (const auto& p : tneg) correct += predict_probability(m, p.values()) < 0.5;
  EXPECT_EQ(correct, 50);
}

TEST(Fusion, SingleClassIsAnError) {
  std::vector<ProbabilityFeatureVector> v{{"a", 0.1, 0.1, 0.1}, {"b", 0.2, 0.2, 0.2}};
  EXPECT_THROW(train_fusion_classifier(v, {1, 1}, v, {1, -1}, {}), Error);
}

TEST(Fusion, MatchesQpOracleIn3d) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 5; ++trial) {
    Points x;
    std::vector<int> y;
    for (int i = 0; i < 16; ++i) {
      const int l = i % 2 ? 1 : -1;
      x.push_back({u(rng) * 0.6 + (l > 0 ? 0.4 : 0), u(rng), u(rng) * 0.6 + (l > 0 ? 0.4 : 0)});
      y.push_back(l);
    }
    SvmParams p;
    p.gamma = 1.0;
    p.tol = 1e-8;
    const auto m = svm_train(x, y, p);
    const auto ref = oracle::solve_dual(x, y, 1.0, KernelType::rbf, 1.0);
    for (const auto& pt : x)
      ASSERT_NEAR(decision_value(m, pt), oracle::dual_decision(ref, x, y, KernelType::rbf, 1.0, pt),
                  1e-4);
  }
}

// ---- PADM -----------------------------------------------------------------------

TEST(Padm, RoundTripIsBitExact) {
  oracle::TempDir tmp;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd(0, 1);
  Points x;
  std::vector<int> y;
  for (int i = 0; i < 30; ++i) {
    x.push_back({nd(rng), nd(rng), nd(rng), nd(rng)});
    y.push_back(x.back()[0] + 0.3 * nd(rng) > 0 ? 1 : -1);
  }
  SvmParams p;
  p.standardize = true;
  p.class_weights = true;
  p.seed = 99;
  auto m = svm_train(x, y, p);
  std::vector<double> s;
  for (const auto& r : x) s.push_back(decision_value(m, r));
  platt_calibrate(m, s, y);
  m.role = ModelRole::saliency;
  m.extractor_id = "external:resnet";
  save_model(tmp.path / "m.padm", m);
  const auto back = load_model(tmp.path / "m.padm");
  EXPECT_EQ(encode_padm(back), encode_padm(m));
  EXPECT_EQ(back.extractor_id, m.extractor_id);
  EXPECT_EQ(back.role, m.role);
  EXPECT_EQ(back.seed, 99u);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> q{nd(rng), nd(rng), nd(rng), nd(rng)};
    const double a = predict_probability(m, q), b = predict_probability(back, q);
    ASSERT_EQ(std::memcmp(&a, &b, sizeof a), 0);
  }
}

TEST(Padm, RejectsCorruptFiles) {
  const auto m = svm_train({{0.0}, {1.0}}, {-1, 1});
  auto bytes = encode_padm(m);
  auto bad = bytes;
  bad[0] = 'Q';
  EXPECT_THROW(decode_padm(bad, "x"), Error);
  auto cut = bytes;
  cut.resize(cut.size() - 3);
  EXPECT_THROW(decode_padm(cut, "x"), Error);
  EXPECT_THROW(load_model("/nonexistent/model.padm"), Error);
}
