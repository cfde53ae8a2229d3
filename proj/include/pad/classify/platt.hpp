#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pad/classify/svm.hpp"

namespace pad {

struct PlattFit {
  double a = 0;
  double b = 0;
  int iterations = 0;
};

// P(attack | s) = 1 / (1 + exp(a s + b)), evaluated without overflow.
inline double platt_probability(double a, double b, double s) {
  const double f = a * s + b;
  return f >= 0 ? std::exp(-f) / (1.0 + std::exp(-f)) : 1.0 / (1.0 + std::exp(f));
}

// Newton's method with backtracking on Platt's regularised log-loss
// (targets (N+ + 1)/(N+ + 2) and 1/(N- + 2)). Labels are +1 (attack) / -1.
inline PlattFit fit_platt(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw data_error("calibration scores and labels are empty or mismatched");
  double prior1 = 0, prior0 = 0;
  for (int l : labels) (l > 0 ? prior1 : prior0) += 1;
  if (prior1 == 0 || prior0 == 0) throw data_error("calibration set contains a single class");

  const std::size_t n = scores.size();
  const double hi = (prior1 + 1) / (prior1 + 2), lo = 1 / (prior0 + 2);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] > 0 ? hi : lo;

  constexpr int max_iter = 100;
  constexpr double grad_tol = 1e-10;  // on the mean-loss gradient
  constexpr double stall_tol = 1e-6;
  constexpr double min_step = 1e-10;
  constexpr double sigma = 1e-12;

  auto loss = [&](double a, double b) {
    double f = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = scores[i] * a + b;
      f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  PlattFit fit;
  fit.a = 0;
  fit.b = std::log((prior0 + 1) / (prior1 + 1));
  double fval = loss(fit.a, fit.b);
  for (int it = 0;; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = scores[i] * fit.a + fit.b;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const double d1 = t[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    const double gnorm = std::max(std::abs(g1), std::abs(g2)) / double(n);
    if (gnorm <= grad_tol) {
      fit.iterations = it;
      return fit;
    }
    if (it >= max_iter)
      throw data_error("Platt calibration did not converge in 100 iterations; use a larger dev set");

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1;
    bool moved = false;
    while (step >= min_step) {
      const double na = fit.a + step * da, nb = fit.b + step * db;
      const double nf = loss(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        fit.a = na;
        fit.b = nb;
        fval = nf;
        moved = true;
        break;
      }
      step /= 2;
    }
    if (!moved) {
      // No representable decrease left: accept if already at the rounding floor.
      if (gnorm <= stall_tol) {
        fit.iterations = it;
        return fit;
      }
      throw data_error("Platt calibration line search failed; use a larger dev set");
    }
  }
}

inline void platt_calibrate(SvmModel& model, const std::vector<double>& dev_scores,
                            const std::vector<int>& dev_labels) {
  const auto fit = fit_platt(dev_scores, dev_labels);
  model.platt_a = fit.a;
  model.platt_b = fit.b;
  model.calibrated = true;
}

inline double predict_probability(const SvmModel& m, const std::vector<double>& x) {
  if (!m.calibrated) throw internal_error("model is not Platt-calibrated");
  return platt_probability(m.platt_a, m.platt_b, decision_value(m, x));
}

}  // namespace pad
