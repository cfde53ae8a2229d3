#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "pad/core/types.hpp"

namespace pad {

struct ConfusionCounts {
  std::uint64_t attacks_total = 0;
  std::uint64_t attacks_accepted = 0;  // attacks classified bona fide
  std::uint64_t bonafide_total = 0;
  std::uint64_t bonafide_rejected = 0;  // bona fide classified attack

  void add(Label truth, Label predicted) {
    if (truth == Label::attack) {
      ++attacks_total;
      attacks_accepted += predicted == Label::bonafide;
    } else {
      ++bonafide_total;
      bonafide_rejected += predicted == Label::attack;
    }
  }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct ErrorRates {
  double apcer = 0;
  double bpcer = 0;
  double hter = 0;

  friend bool operator==(const ErrorRates&, const ErrorRates&) = default;
};

inline ErrorRates compute_rates(const ConfusionCounts& c) {
  if (c.attacks_accepted > c.attacks_total || c.bonafide_rejected > c.bonafide_total)
    throw data_error("confusion counts exceed class totals");
  if (c.attacks_total == 0) throw data_error("no attack presentations: APCER undefined");
  if (c.bonafide_total == 0) throw data_error("no bona fide presentations: BPCER undefined");
  ErrorRates r;
  r.apcer = double(c.attacks_accepted) / double(c.attacks_total);
  r.bpcer = double(c.bonafide_rejected) / double(c.bonafide_total);
  r.hter = (r.apcer + r.bpcer) / 2;
  return r;
}

struct ScoredLabel {
  double score = 0;  // P(attack)
  Label label = Label::bonafide;
};

// Decision rule shared by every threshold in the pipeline: attack iff score > threshold.
inline ConfusionCounts counts_at(const std::vector<ScoredLabel>& scores, double threshold) {
  ConfusionCounts c;
  for (const auto& s : scores) c.add(s.label, s.score > threshold ? Label::attack : Label::bonafide);
  return c;
}

// Candidate thresholds: midpoints between consecutive sorted scores.
inline std::vector<double> threshold_candidates(const std::vector<ScoredLabel>& scores) {
  std::vector<double> sorted;
  for (const auto& s : scores) sorted.push_back(s.score);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  for (std::size_t i = 1; i < sorted.size(); ++i) out.push_back((sorted[i - 1] + sorted[i]) / 2);
  return out;
}

// Equal-error-rate threshold: the candidate minimising |APCER - BPCER|; ties
// go to the smaller threshold.
inline double select_threshold_eer(const std::vector<ScoredLabel>& scores) {
  bool has_attack = false, has_bonafide = false;
  for (const auto& s : scores) (s.label == Label::attack ? has_attack : has_bonafide) = true;
  if (!has_attack || !has_bonafide)
    throw data_error("threshold selection needs both classes in the dev scores");
  const auto candidates = threshold_candidates(scores);
  double best_tau = candidates.front();
  double best_gap = std::numeric_limits<double>::infinity();
  for (double tau : candidates) {
    const auto r = compute_rates(counts_at(scores, tau));
    const double gap = std::abs(r.apcer - r.bpcer);
    if (gap < best_gap || (gap == best_gap && tau < best_tau)) {
      best_gap = gap;
      best_tau = tau;
    }
  }
  return best_tau;
}

}  // namespace pad
