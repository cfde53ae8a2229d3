#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pad/classify/fusion.hpp"
#include "pad/classify/model_io.hpp"
#include "pad/core/parallel.hpp"
#include "pad/core/protocol.hpp"
#include "pad/eval/report.hpp"
#include "pad/features/extractor.hpp"

namespace pad {

struct SampleFeatures {
  SampleRecord record;
  // Indexed by PropertyKind; one vector per surviving frame, same frame order
  // for all three properties.
  std::array<std::vector<FeatureVector>, 3> by_property;

  const std::vector<FeatureVector>& of(PropertyKind k) const {
    return by_property[static_cast<std::size_t>(k)];
  }
};

using FeatureProvider = std::function<SampleFeatures(const SampleRecord&)>;

enum class FusionMode { pfv, concat };

inline std::string_view to_string(FusionMode m) { return m == FusionMode::pfv ? "pfv" : "concat"; }

inline FusionMode fusion_mode_from_string(const std::string& s) {
  if (s == "pfv") return FusionMode::pfv;
  if (s == "concat") return FusionMode::concat;
  throw usage_error("unknown fusion mode '" + s + "' (expected pfv or concat)");
}

struct RunSettings {
  SvmParams stage1;
  SvmParams fusion;
  FusionMode fusion_mode = FusionMode::pfv;
  std::uint64_t seed = 0;
  std::string config_digest;
  int jobs = 1;
  // Attack types always shown in the report, even when absent from the test set.
  std::vector<std::string> report_attack_types;
};

struct TrainedPipeline {
  std::array<SvmModel, 3> property_models;
  std::array<double, 3> property_thresholds{0.5, 0.5, 0.5};
  SvmModel fusion_model;
  double fusion_threshold = 0.5;
  FusionMode fusion_mode = FusionMode::pfv;
  std::string config_digest;
  std::uint64_t seed = 0;
};

inline std::vector<SampleFeatures> gather_features(const std::vector<SampleRecord>& records,
                                                   const FeatureProvider& provider, int jobs) {
  std::vector<SampleFeatures> out(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    out[i] = provider(records[i]);
    for (auto k : kAllProperties)
      if (out[i].of(k).empty())
        throw data_error("sample '" + records[i].sample_id + "' has no " +
                         std::string(to_string(k)) + " features");
    const auto n = out[i].of(PropertyKind::depth).size();
    for (auto k : kAllProperties)
      if (out[i].of(k).size() != n)
        throw data_error("sample '" + records[i].sample_id + "' has unequal frame counts");
  });
  return out;
}

namespace detail {

inline std::vector<double> concat_frame(const SampleFeatures& s, std::size_t frame) {
  std::vector<double> x;
  x.reserve(3 * kFeatureDim);
  for (auto k : kAllProperties) {
    const auto& v = s.of(k)[frame].values;
    x.insert(x.end(), v.begin(), v.end());
  }
  return x;
}

inline std::string concat_extractor_id(const SampleFeatures& s) {
  return s.of(PropertyKind::depth).front().extractor_id;
}

// Frame-level training matrix for one property (or all three concatenated).
inline void frame_matrix(const std::vector<SampleFeatures>& samples, std::optional<PropertyKind> kind,
                         std::vector<std::vector<double>>& x, std::vector<int>& y) {
  for (const auto& s : samples) {
    const auto n = s.of(PropertyKind::depth).size();
    for (std::size_t f = 0; f < n; ++f) {
      x.push_back(kind ? to_double(s.of(*kind)[f].values) : concat_frame(s, f));
      y.push_back(to_sign(s.record.label));
    }
  }
}

inline std::vector<FeatureVector> all_vectors(const std::vector<SampleFeatures>& samples,
                                              PropertyKind k) {
  std::vector<FeatureVector> out;
  for (const auto& s : samples) out.insert(out.end(), s.of(k).begin(), s.of(k).end());
  return out;
}

inline FrameProbabilitySeries concat_series(const SvmModel& m, const SampleFeatures& s) {
  FrameProbabilitySeries out;
  out.sample_id = s.record.sample_id;
  for (std::size_t f = 0; f < s.of(PropertyKind::depth).size(); ++f)
    out.probs.push_back(predict_probability(m, concat_frame(s, f)));
  return out;
}

}  // namespace detail

inline double fused_probability(const TrainedPipeline& tp, const SampleFeatures& s) {
  if (tp.fusion_mode == FusionMode::concat)
    return series_mean(detail::concat_series(tp.fusion_model, s));
  std::vector<FrameProbabilitySeries> series;
  for (auto k : kAllProperties)
    series.push_back(predict_frame_probabilities(tp.property_models[static_cast<int>(k)], s.of(k)));
  return predict_probability(tp.fusion_model, assemble_pfv(series).values());
}

inline TrainedPipeline train_pipeline(const std::vector<SampleFeatures>& train,
                                      const std::vector<SampleFeatures>& dev,
                                      const RunSettings& settings) {
  if (train.empty() || dev.empty()) throw data_error("training and dev sets must be non-empty");
  TrainedPipeline tp;
  tp.fusion_mode = settings.fusion_mode;
  tp.config_digest = settings.config_digest;
  tp.seed = settings.seed;
  SvmParams stage1 = settings.stage1;
  stage1.seed = settings.seed;

  // Stage 1: one frame classifier per property, calibrated and thresholded on dev.
  parallel_for(3, settings.jobs, [&](std::size_t ki) {
    const auto kind = kAllProperties[ki];
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    detail::frame_matrix(train, kind, x, y);
    auto model = svm_train(x, y, stage1);
    model.role = role_for(kind);
    model.extractor_id = common_extractor_id(detail::all_vectors(train, kind));
    if (common_extractor_id(detail::all_vectors(dev, kind)) != model.extractor_id)
      throw data_error("dev features use a different extractor than training features");

    std::vector<std::vector<double>> dx;
    std::vector<int> dy;
    detail::frame_matrix(dev, kind, dx, dy);
    std::vector<double> scores;
    for (const auto& v : dx) scores.push_back(decision_value(model, v));
    platt_calibrate(model, scores, dy);

    std::vector<ScoredLabel> dev_probs;
    for (std::size_t i = 0; i < scores.size(); ++i)
      dev_probs.push_back({platt_probability(model.platt_a, model.platt_b, scores[i]),
                           dy[i] > 0 ? Label::attack : Label::bonafide});
    tp.property_thresholds[ki] = select_threshold_eer(dev_probs);
    tp.property_models[ki] = std::move(model);
  });

  SvmParams fusion = settings.fusion;
  fusion.seed = settings.seed;
  if (settings.fusion_mode == FusionMode::pfv) {
    auto pfvs = [&](const std::vector<SampleFeatures>& set) {
      std::vector<ProbabilityFeatureVector> out;
      for (const auto& s : set) {
        std::vector<FrameProbabilitySeries> series;
        for (auto k : kAllProperties)
          series.push_back(
              predict_frame_probabilities(tp.property_models[static_cast<int>(k)], s.of(k)));
        out.push_back(assemble_pfv(series));
      }
      return out;
    };
    auto labels = [](const std::vector<SampleFeatures>& set) {
      std::vector<int> y;
      for (const auto& s : set) y.push_back(to_sign(s.record.label));
      return y;
    };
    tp.fusion_model = train_fusion_classifier(pfvs(train), labels(train), pfvs(dev), labels(dev), fusion);
  } else {
    fusion.kernel = settings.stage1.kernel;
    std::vector<std::vector<double>> x, dx;
    std::vector<int> y, dy;
    detail::frame_matrix(train, std::nullopt, x, y);
    detail::frame_matrix(dev, std::nullopt, dx, dy);
    tp.fusion_model = svm_train(x, y, fusion);
    tp.fusion_model.role = ModelRole::concat;
    tp.fusion_model.extractor_id = detail::concat_extractor_id(train.front());
    std::vector<double> scores;
    for (const auto& v : dx) scores.push_back(decision_value(tp.fusion_model, v));
    platt_calibrate(tp.fusion_model, scores, dy);
  }

  std::vector<ScoredLabel> dev_fused;
  for (const auto& s : dev) dev_fused.push_back({fused_probability(tp, s), s.record.label});
  tp.fusion_threshold = select_threshold_eer(dev_fused);
  return tp;
}

struct SamplePrediction {
  SampleRecord record;
  std::array<Label, 3> property_labels{};
  Label fused_label = Label::bonafide;
  double fused_prob = 0;
};

inline std::vector<SamplePrediction> predict_samples(const TrainedPipeline& tp,
                                                     const std::vector<SampleFeatures>& samples,
                                                     int jobs = 1) {
  std::vector<SamplePrediction> out(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    const auto& s = samples[i];
    auto& p = out[i];
    p.record = s.record;
    for (auto k : kAllProperties) {
      const auto ki = static_cast<std::size_t>(k);
      const auto series = predict_frame_probabilities(tp.property_models[ki], s.of(k));
      p.property_labels[ki] = majority_vote_video(series, tp.property_thresholds[ki]);
    }
    p.fused_prob = fused_probability(tp, s);
    p.fused_label = p.fused_prob > tp.fusion_threshold ? Label::attack : Label::bonafide;
  });
  return out;
}

inline EvalReport build_report(const TrainedPipeline& tp,
                               const std::vector<SamplePrediction>& preds,
                               const ProtocolSummary& summary, const RunSettings& settings) {
  EvalReport rep;
  rep.protocol = summary;
  rep.protocol.fusion_mode = std::string(to_string(tp.fusion_mode));
  rep.seed = tp.seed;
  rep.config_digest = tp.config_digest;
  rep.n_test = preds.size();
  std::set<std::string> types(settings.report_attack_types.begin(),
                              settings.report_attack_types.end());
  for (const auto& p : preds)
    if (p.record.attack_type) types.insert(*p.record.attack_type);
  rep.attack_types.assign(types.begin(), types.end());

  const char* names[] = {"Depth", "Illuminant", "Saliency", "Fused"};
  for (int m = 0; m < 4; ++m) {
    ReportRow row;
    row.method = names[m];
    row.threshold = m < 3 ? tp.property_thresholds[m] : tp.fusion_threshold;
    auto predicted = [&](const SamplePrediction& p) {
      return m < 3 ? p.property_labels[m] : p.fused_label;
    };
    for (const auto& p : preds) row.counts.add(p.record.label, predicted(p));
    row.rates = compute_rates(row.counts);
    for (const auto& t : rep.attack_types) {
      SliceResult s;
      for (const auto& p : preds)
        if (p.record.label == Label::bonafide || p.record.attack_type == t)
          s.counts.add(p.record.label, predicted(p));
      if (s.counts.attacks_total == 0 || s.counts.bonafide_total == 0) {
        row.slices[t] = std::nullopt;
        continue;
      }
      s.rates = compute_rates(s.counts);
      row.slices[t] = s;
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

inline ProtocolSummary summarize(const ProtocolSpec& spec) {
  ProtocolSummary s;
  s.mode = spec.mode == ProtocolMode::intra ? "intra" : "inter";
  s.train_datasets = spec.train_datasets;
  s.test_dataset = spec.test_dataset;
  s.dev_source = spec.dev_source.is_kfold() ? "kfold:" + std::to_string(spec.dev_source.kfold)
                                            : "dev_split";
  return s;
}

// Full protocol: resolve splits, train both stages, evaluate the test split.
inline EvalReport run_protocol(const ProtocolSpec& spec,
                               const std::vector<DatasetManifest>& manifests,
                               const FeatureProvider& provider, const RunSettings& settings) {
  auto resolved = resolve_protocol(spec, manifests);
  const auto train = gather_features(resolved.train, provider, settings.jobs);
  const auto dev = gather_features(resolved.dev, provider, settings.jobs);
  const auto test = gather_features(resolved.test, provider, settings.jobs);
  const auto tp = train_pipeline(train, dev, settings);
  return build_report(tp, predict_samples(tp, test, settings.jobs), summarize(spec), settings);
}

// Trained pipeline on disk: four PADM files plus pipeline.json.
inline void save_pipeline(const std::filesystem::path& dir, const TrainedPipeline& tp) {
  std::filesystem::create_directories(dir);
  for (auto k : kAllProperties)
    save_model(dir / (std::string(to_string(k)) + ".padm"), tp.property_models[static_cast<int>(k)]);
  save_model(dir / "fusion.padm", tp.fusion_model);
  nlohmann::json j{{"config_digest", tp.config_digest},
                   {"seed", tp.seed},
                   {"fusion_mode", std::string(to_string(tp.fusion_mode))},
                   {"fusion_threshold", tp.fusion_threshold},
                   {"property_thresholds", tp.property_thresholds}};
  write_text_atomic(dir / "pipeline.json", j.dump(2) + "\n");
}

inline TrainedPipeline load_pipeline(const std::filesystem::path& dir) {
  TrainedPipeline tp;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(dir / "pipeline.json"));
    tp.config_digest = j.at("config_digest").get<std::string>();
    tp.seed = j.at("seed").get<std::uint64_t>();
    tp.fusion_mode = fusion_mode_from_string(j.at("fusion_mode").get<std::string>());
    tp.fusion_threshold = j.at("fusion_threshold").get<double>();
    tp.property_thresholds = j.at("property_thresholds").get<std::array<double, 3>>();
  } catch (const nlohmann::json::exception& e) {
    throw data_error("malformed pipeline.json in '" + dir.string() + "': " + e.what());
  }
  for (auto k : kAllProperties)
    tp.property_models[static_cast<int>(k)] =
        load_model(dir / (std::string(to_string(k)) + ".padm"));
  tp.fusion_model = load_model(dir / "fusion.padm");
  return tp;
}

}  // namespace pad
