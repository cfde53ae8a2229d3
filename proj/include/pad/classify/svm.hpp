#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <list>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pad/core/log.hpp"
#include "pad/core/types.hpp"

namespace pad {

enum class KernelType : std::uint8_t { linear = 0, rbf = 1 };

// Which input a model consumes.
enum class ModelRole : std::uint8_t { depth = 0, illuminant = 1, saliency = 2, fusion = 3, concat = 4 };

inline ModelRole role_for(PropertyKind k) { return static_cast<ModelRole>(static_cast<int>(k)); }

inline std::string_view to_string(ModelRole r) {
  switch (r) {
    case ModelRole::depth: return "depth";
    case ModelRole::illuminant: return "illuminant";
    case ModelRole::saliency: return "saliency";
    case ModelRole::fusion: return "fusion";
    case ModelRole::concat: return "concat";
  }
  return "?";
}

struct SvmParams {
  KernelType kernel = KernelType::rbf;
  double gamma = 0.0;  // <= 0: 1 / (dim * variance of the training inputs)
  double c = 1.0;
  double tol = 1e-3;   // stop when the maximal KKT violation pair gap <= tol
  long max_iter = 1'000'000;
  std::uint64_t seed = 0;
  bool class_weights = false;  // scale C per class by n / (2 n_class)
  bool standardize = false;    // z-score inputs with train-set statistics
};

struct SvmModel {
  KernelType kernel = KernelType::rbf;
  double gamma = 0.0;
  double c = 1.0;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coefs;  // alpha_i * y_i
  double bias = 0.0;
  double platt_a = 0.0;
  double platt_b = 0.0;
  bool calibrated = false;
  ModelRole role = ModelRole::depth;
  std::string extractor_id;
  // Input standardisation; empty when disabled.
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  // Training provenance.
  double tol = 1e-3;
  double kkt_gap = 0.0;
  long iterations = 0;
  std::uint64_t seed = 0;
  bool class_weights = false;

  std::size_t input_dim = 0;

  std::size_t dim() const { return input_dim; }
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double kernel_value(KernelType k, double gamma, const std::vector<double>& a,
                           const std::vector<double>& b) {
  if (k == KernelType::linear) return dot(a, b);
  double d2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

// Kernel rows with LRU eviction, bounded by a byte budget.
class KernelCache {
 public:
  KernelCache(const std::vector<std::vector<double>>& x, KernelType k, double gamma,
              std::size_t budget_bytes = std::size_t(512) << 20)
      : x_(x), kernel_(k), gamma_(gamma) {
    const std::size_t row_bytes = std::max<std::size_t>(1, x.size() * sizeof(double));
    capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
    diag_.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diag_[i] = kernel_value(k, gamma, x[i], x[i]);
  }

  double diag(std::size_t i) const { return diag_[i]; }

  const std::vector<double>& row(std::size_t i) {
    auto it = rows_.find(i);
    if (it != rows_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      return it->second.first;
    }
    if (rows_.size() >= capacity_) {
      rows_.erase(lru_.back());
      lru_.pop_back();
    }
    std::vector<double> r(x_.size());
    for (std::size_t j = 0; j < x_.size(); ++j)
      r[j] = j == i ? diag_[i] : kernel_value(kernel_, gamma_, x_[i], x_[j]);
    lru_.push_front(i);
    auto [pos, _] = rows_.emplace(i, std::make_pair(std::move(r), lru_.begin()));
    return pos->second.first;
  }

 private:
  const std::vector<std::vector<double>>& x_;
  KernelType kernel_;
  double gamma_;
  std::size_t capacity_;
  std::vector<double> diag_;
  std::list<std::size_t> lru_;
  std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>>
      rows_;
};

}  // namespace detail

inline std::vector<double> standardize_input(const SvmModel& m, const std::vector<double>& x) {
  if (m.feature_mean.empty()) return x;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - m.feature_mean[i]) / m.feature_scale[i];
  return out;
}

inline double decision_value(const SvmModel& m, const std::vector<double>& x_raw) {
  if (x_raw.size() != m.dim())
    throw data_error("input dimension " + std::to_string(x_raw.size()) + ", model expects " +
                     std::to_string(m.dim()));
  const auto x = standardize_input(m, x_raw);
  double f = m.bias;
  for (std::size_t k = 0; k < m.support_vectors.size(); ++k)
    f += m.dual_coefs[k] * detail::kernel_value(m.kernel, m.gamma, m.support_vectors[k], x);
  return f;
}

inline double auto_gamma(const std::vector<std::vector<double>>& x) {
  double sum = 0, sq = 0;
  std::size_t n = 0;
  for (const auto& row : x)
    for (double v : row) {
      sum += v;
      sq += v * v;
      ++n;
    }
  const double mean = sum / double(n);
  const double var = sq / double(n) - mean * mean;
  const double dim = double(x.front().size());
  return var > 1e-300 ? 1.0 / (dim * var) : 1.0;
}

struct SmoSolution {
  std::vector<double> alpha;
  double bias = 0;  // decision = sum alpha_i y_i K(x_i, x) + bias
  double gap = 0;
  long iterations = 0;
};

// Sequential minimal optimisation for the soft-margin dual
//   min 1/2 a'Qa - e'a  s.t. 0 <= a_i <= C_i, y'a = 0,  Q_ij = y_i y_j K_ij,
// using second-order working-set selection.
inline SmoSolution smo_solve(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                             const std::vector<double>& c_bound, KernelType kernel, double gamma,
                             double tol, long max_iter) {
  const std::size_t n = x.size();
  constexpr double tau = 1e-12;
  detail::KernelCache cache(x, kernel, gamma);
  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  auto in_up = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] < c_bound[t]) || (y[t] < 0 && alpha[t] > 0);
  };
  auto in_low = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c_bound[t]);
  };

  SmoSolution sol;
  long iter = 0;
  double gap = 0;
  for (;; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t)
      if (in_up(t) && -y[t] * grad[t] > gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    double gmin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t)
      if (in_low(t)) gmin = std::min(gmin, -y[t] * grad[t]);
    gap = gmax - gmin;
    if (i == n || gap <= tol) break;
    if (iter >= max_iter) {
      log_warning("SMO hit the iteration cap (" + std::to_string(max_iter) + "), KKT gap " +
                  std::to_string(gap));
      break;
    }

    const auto& ki = cache.row(i);
    std::size_t j = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double b = gmax + y[t] * grad[t];
      if (b <= 0) continue;
      double a = cache.diag(i) + cache.diag(t) - 2.0 * ki[t];
      if (a <= 0) a = tau;
      const double obj = -(b * b) / a;
      if (obj < best) {
        best = obj;
        j = t;
      }
    }
    if (j == n) break;
    const auto kj = cache.row(j);  // copy: the cache may evict row i's storage

    const double ci = c_bound[i], cj = c_bound[j];
    const double old_ai = alpha[i], old_aj = alpha[j];
    double quad = cache.diag(i) + cache.diag(j) - 2.0 * ki[j];
    if (quad <= 0) quad = tau;
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > ci - cj) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = ci - diff;
        }
      } else if (alpha[j] > cj) {
        alpha[j] = cj;
        alpha[i] = cj + diff;
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > ci) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = sum - ci;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > cj) {
        if (alpha[j] > cj) {
          alpha[j] = cj;
          alpha[i] = sum - cj;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    const auto& ki2 = cache.row(i);
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += y[t] * (y[i] * ki2[t] * dai + y[j] * kj[t] * daj);
  }

  // Bias from free vectors; midpoint of the feasible interval otherwise.
  double sum_free = 0, ub = std::numeric_limits<double>::infinity(),
         lb = -std::numeric_limits<double>::infinity();
  int n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c_bound[t]) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : (ub + lb) / 2;
  sol.alpha = std::move(alpha);
  sol.bias = -rho;
  sol.gap = gap;
  sol.iterations = iter;
  return sol;
}

inline SvmModel svm_train(const std::vector<std::vector<double>>& x_raw, const std::vector<int>& y,
                          const SvmParams& params = {}) {
  if (x_raw.empty() || x_raw.size() != y.size())
    throw data_error("training set is empty or labels do not match inputs");
  const std::size_t dim = x_raw.front().size();
  if (dim == 0) throw data_error("zero-dimensional training inputs");
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < x_raw.size(); ++i) {
    if (x_raw[i].size() != dim)
      throw data_error("dimension mismatch in training inputs: " + std::to_string(x_raw[i].size()) +
                       " vs " + std::to_string(dim));
    for (double v : x_raw[i])
      if (!std::isfinite(v)) throw data_error("non-finite training input");
    if (y[i] == 1) ++n_pos;
    else if (y[i] == -1) ++n_neg;
    else throw data_error("labels must be +1 or -1");
  }
  if (n_pos == 0 || n_neg == 0) throw data_error("training set contains a single class");
  if (!(params.c > 0)) throw data_error("C must be positive");

  SvmModel m;
  m.input_dim = dim;
  m.kernel = params.kernel;
  m.c = params.c;
  m.tol = params.tol;
  m.seed = params.seed;
  m.class_weights = params.class_weights;

  std::vector<std::vector<double>> x = x_raw;
  if (params.standardize) {
    m.feature_mean.assign(dim, 0.0);
    m.feature_scale.assign(dim, 0.0);
    for (const auto& r : x_raw)
      for (std::size_t d = 0; d < dim; ++d) m.feature_mean[d] += r[d];
    for (auto& v : m.feature_mean) v /= double(x_raw.size());
    for (const auto& r : x_raw)
      for (std::size_t d = 0; d < dim; ++d)
        m.feature_scale[d] += (r[d] - m.feature_mean[d]) * (r[d] - m.feature_mean[d]);
    for (auto& v : m.feature_scale) {
      v = std::sqrt(v / double(x_raw.size()));
      if (v < 1e-12) v = 1.0;
    }
    for (auto& r : x) r = standardize_input(m, r);
  }
  m.gamma = params.kernel == KernelType::rbf ? (params.gamma > 0 ? params.gamma : auto_gamma(x)) : 0.0;

  std::vector<double> c_bound(x.size(), params.c);
  if (params.class_weights) {
    const double total = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      c_bound[i] = params.c * total / (2.0 * double(y[i] > 0 ? n_pos : n_neg));
  }
  auto sol = smo_solve(x, y, c_bound, m.kernel, m.gamma, params.tol, params.max_iter);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (sol.alpha[i] <= 0) continue;
    m.support_vectors.push_back(x[i]);
    m.dual_coefs.push_back(sol.alpha[i] * y[i]);
  }
  m.bias = sol.bias;
  m.kkt_gap = sol.gap;
  m.iterations = sol.iterations;
  return m;
}

}  // namespace pad
