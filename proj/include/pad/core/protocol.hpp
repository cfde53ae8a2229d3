#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pad/core/types.hpp"

namespace pad {

enum class ProtocolMode { intra, inter };

struct DevSource {
  // k == 0 means "use the dev split"; otherwise subject-disjoint k-fold on train.
  int kfold = 0;

  static DevSource dev_split() { return {}; }
  static DevSource folds(int k) { return {k}; }
  bool is_kfold() const { return kfold > 0; }
};

struct ProtocolSpec {
  ProtocolMode mode = ProtocolMode::intra;
  std::vector<std::string> train_datasets;
  std::string test_dataset;
  DevSource dev_source;
  Split train_split = Split::train;
  Split test_split = Split::test;
  std::uint64_t fold_seed = 0;
};

struct ResolvedProtocol {
  std::vector<SampleRecord> train;
  std::vector<SampleRecord> dev;
  std::vector<SampleRecord> test;
};

// Deterministic subject -> fold assignment. Subjects are sorted, shuffled with
// a seeded Fisher-Yates pass and dealt round-robin into k folds.
inline std::map<std::string, int> assign_subject_folds(std::vector<std::string> subjects, int k,
                                                       std::uint64_t seed) {
  std::sort(subjects.begin(), subjects.end());
  subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
  if (k < 2) throw data_error("k-fold needs k >= 2, got " + std::to_string(k));
  if (static_cast<std::size_t>(k) > subjects.size())
    throw data_error("k-fold with k = " + std::to_string(k) + " but only " +
                     std::to_string(subjects.size()) + " subjects");
  std::mt19937_64 rng(seed);
  for (std::size_t i = subjects.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(subjects[i - 1], subjects[j]);
  }
  std::map<std::string, int> folds;
  for (std::size_t i = 0; i < subjects.size(); ++i) folds[subjects[i]] = static_cast<int>(i % k);
  return folds;
}

namespace detail {

inline const DatasetManifest& find_manifest(const std::vector<DatasetManifest>& manifests,
                                            const std::string& name) {
  for (const auto& m : manifests)
    if (m.dataset_name == name) return m;
  throw data_error("protocol references unknown dataset '" + name + "'");
}

inline std::vector<SampleRecord> take_split(const DatasetManifest& m, Split s) {
  std::vector<SampleRecord> out;
  for (const auto& r : m.records)
    if (r.split == s) out.push_back(r);
  if (out.empty())
    throw data_error("dataset '" + m.dataset_name + "' has no '" + std::string(to_string(s)) +
                     "' split");
  return out;
}

inline void check_disjoint(const std::vector<SampleRecord>& a, const std::vector<SampleRecord>& b,
                           const char* what) {
  std::set<std::string> ids;
  for (const auto& r : a) ids.insert(r.dataset_name + "/" + r.sample_id);
  for (const auto& r : b)
    if (ids.count(r.dataset_name + "/" + r.sample_id))
      throw data_error(std::string("overlap between ") + what + ": sample '" + r.sample_id + "'");
}

}  // namespace detail

inline ResolvedProtocol resolve_protocol(const ProtocolSpec& spec,
                                         const std::vector<DatasetManifest>& manifests) {
  if (spec.train_datasets.empty()) throw data_error("protocol has no training dataset");
  if (spec.mode == ProtocolMode::intra) {
    if (spec.train_datasets.size() != 1 || spec.train_datasets.front() != spec.test_dataset)
      throw data_error("intra protocol needs train and test from the same dataset");
  } else {
    for (const auto& t : spec.train_datasets)
      if (t == spec.test_dataset)
        throw data_error("inter protocol trains on the test dataset '" + t + "'");
  }

  ResolvedProtocol out;
  for (const auto& name : spec.train_datasets) {
    const auto& m = detail::find_manifest(manifests, name);
    auto train = detail::take_split(m, spec.train_split);
    out.train.insert(out.train.end(), train.begin(), train.end());
    if (!spec.dev_source.is_kfold()) {
      auto dev = detail::take_split(m, Split::dev);
      out.dev.insert(out.dev.end(), dev.begin(), dev.end());
    }
  }
  const auto& test_manifest = detail::find_manifest(manifests, spec.test_dataset);
  out.test = detail::take_split(test_manifest, spec.test_split);

  if (spec.dev_source.is_kfold()) {
    // Subjects are namespaced by dataset so combined training sets never merge ids.
    std::vector<std::string> subjects;
    for (const auto& r : out.train) subjects.push_back(r.dataset_name + "/" + r.subject_id);
    auto folds = assign_subject_folds(subjects, spec.dev_source.kfold, spec.fold_seed);
    std::vector<SampleRecord> keep;
    for (auto& r : out.train) {
      if (folds.at(r.dataset_name + "/" + r.subject_id) == 0)
        out.dev.push_back(std::move(r));
      else
        keep.push_back(std::move(r));
    }
    out.train = std::move(keep);
  }

  detail::check_disjoint(out.train, out.test, "train and test");
  detail::check_disjoint(out.train, out.dev, "train and dev");
  detail::check_disjoint(out.dev, out.test, "dev and test");
  return out;
}

}  // namespace pad
