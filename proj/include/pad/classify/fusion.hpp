#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "pad/classify/platt.hpp"
#include "pad/features/feature_vector.hpp"

namespace pad {

struct FrameProbabilitySeries {
  std::string sample_id;
  PropertyKind property = PropertyKind::depth;
  std::vector<double> probs;  // P(attack) per frame, in frame order
};

// Mean per-property frame probability, ordered (depth, illuminant, saliency).
struct ProbabilityFeatureVector {
  std::string sample_id;
  double p_depth = 0;
  double p_illuminant = 0;
  double p_saliency = 0;

  std::vector<double> values() const { return {p_depth, p_illuminant, p_saliency}; }
};

inline std::vector<double> to_double(const std::vector<float>& v) { return {v.begin(), v.end()}; }

inline FrameProbabilitySeries predict_frame_probabilities(const SvmModel& model,
                                                          const std::vector<FeatureVector>& frames) {
  if (frames.empty()) throw data_error("no frames to score");
  FrameProbabilitySeries out;
  out.sample_id = frames.front().sample_id;
  out.property = frames.front().kind;
  if (model.role != role_for(out.property))
    throw data_error("model for '" + std::string(to_string(model.role)) + "' applied to '" +
                     std::string(to_string(out.property)) + "' features");
  for (const auto& f : frames) {
    if (f.kind != out.property || f.sample_id != out.sample_id)
      throw data_error("frame features of sample '" + out.sample_id + "' are not homogeneous");
    if (f.extractor_id != model.extractor_id)
      throw data_error("extractor mismatch: model trained on '" + model.extractor_id +
                       "', features from '" + f.extractor_id + "'");
    out.probs.push_back(predict_probability(model, to_double(f.values)));
  }
  return out;
}

inline double series_mean(const FrameProbabilitySeries& s) {
  if (s.probs.empty()) throw data_error("empty probability series for '" + s.sample_id + "'");
  double sum = 0;
  for (double p : s.probs) sum += p;
  return sum / double(s.probs.size());
}

// Accepts the three series in any order; each property must appear once.
inline ProbabilityFeatureVector assemble_pfv(const std::vector<FrameProbabilitySeries>& series) {
  std::map<PropertyKind, const FrameProbabilitySeries*> by_kind;
  for (const auto& s : series) {
    if (!by_kind.emplace(s.property, &s).second)
      throw data_error("duplicate " + std::string(to_string(s.property)) + " series");
  }
  for (auto k : kAllProperties)
    if (!by_kind.count(k)) throw data_error("missing " + std::string(to_string(k)) + " series");
  ProbabilityFeatureVector pfv;
  pfv.sample_id = by_kind[PropertyKind::depth]->sample_id;
  for (auto k : kAllProperties)
    if (by_kind[k]->sample_id != pfv.sample_id)
      throw data_error("series belong to different samples");
  pfv.p_depth = series_mean(*by_kind[PropertyKind::depth]);
  pfv.p_illuminant = series_mean(*by_kind[PropertyKind::illuminant]);
  pfv.p_saliency = series_mean(*by_kind[PropertyKind::saliency]);
  return pfv;
}

// Attack iff more than half the frames exceed the threshold; an exact tie is
// resolved toward attack.
inline Label majority_vote_video(const FrameProbabilitySeries& s, double threshold = 0.5) {
  if (s.probs.empty()) throw data_error("empty probability series for '" + s.sample_id + "'");
  std::size_t above = 0;
  for (double p : s.probs) above += p > threshold;
  return 2 * above >= s.probs.size() ? Label::attack : Label::bonafide;
}

// Stage-2: RBF SVM over pfvs, Platt-calibrated on dev pfvs.
inline SvmModel train_fusion_classifier(const std::vector<ProbabilityFeatureVector>& train,
                                        const std::vector<int>& train_labels,
                                        const std::vector<ProbabilityFeatureVector>& dev,
                                        const std::vector<int>& dev_labels, SvmParams params) {
  params.kernel = KernelType::rbf;
  std::vector<std::vector<double>> x;
  for (const auto& p : train) x.push_back(p.values());
  auto model = svm_train(x, train_labels, params);
  model.role = ModelRole::fusion;
  std::vector<double> scores;
  for (const auto& p : dev) scores.push_back(decision_value(model, p.values()));
  platt_calibrate(model, scores, dev_labels);
  return model;
}

}  // namespace pad
