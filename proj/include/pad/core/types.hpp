#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pad/core/error.hpp"

namespace pad {

enum class PropertyKind { depth = 0, illuminant = 1, saliency = 2 };

inline constexpr std::array<PropertyKind, 3> kAllProperties = {
    PropertyKind::depth, PropertyKind::illuminant, PropertyKind::saliency};

inline std::string_view to_string(PropertyKind k) {
  switch (k) {
    case PropertyKind::depth: return "depth";
    case PropertyKind::illuminant: return "illuminant";
    case PropertyKind::saliency: return "saliency";
  }
  return "?";
}

inline PropertyKind property_from_string(std::string_view s) {
  if (s == "depth") return PropertyKind::depth;
  if (s == "illuminant") return PropertyKind::illuminant;
  if (s == "saliency") return PropertyKind::saliency;
  throw data_error("unknown property kind '" + std::string(s) + "'");
}

enum class Label { bonafide, attack };

inline std::string_view to_string(Label l) {
  return l == Label::attack ? "attack" : "bonafide";
}

// SVM sign convention: attack is the positive class.
inline int to_sign(Label l) { return l == Label::attack ? +1 : -1; }

enum class Split { train, dev, test, enroll };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
    case Split::enroll: return "enroll";
  }
  return "?";
}

inline std::optional<Split> split_from_string(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "dev") return Split::dev;
  if (s == "test") return Split::test;
  if (s == "enroll") return Split::enroll;
  return std::nullopt;
}

struct SampleRecord {
  std::string sample_id;
  std::string media_path;
  Label label = Label::bonafide;
  std::optional<std::string> attack_type;
  std::string subject_id;
  Split split = Split::train;
  std::string dataset_name;
  std::optional<std::string> landmarks_path;
};

struct DatasetManifest {
  std::string dataset_name;
  std::vector<SampleRecord> records;
  std::optional<double> fps_native;

  std::size_t count(Split s) const {
    std::size_t n = 0;
    for (const auto& r : records) n += (r.split == s);
    return n;
  }
};

}  // namespace pad
