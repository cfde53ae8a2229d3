#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "pad/core/types.hpp"

namespace pad {

namespace detail {

inline const std::set<std::string>& manifest_keys() {
  static const std::set<std::string> keys = {
      "sample_id", "media_path", "label",          "attack_type",
      "subject_id", "split",     "dataset_name", "landmarks_path"};
  return keys;
}

inline std::optional<std::string> optional_string(const nlohmann::json& j,
                                                  const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw data_error(std::string("'") + key + "' must be a string");
  auto s = it->get<std::string>();
  if (s.empty()) return std::nullopt;
  return s;
}

inline std::string required_string(const nlohmann::json& j, const char* key) {
  auto v = optional_string(j, key);
  if (!v) throw data_error(std::string("missing key '") + key + "'");
  return *v;
}

inline std::string resolve_relative(const std::filesystem::path& base,
                                    const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path.lexically_normal().string();
  return (base / path).lexically_normal().string();
}

}  // namespace detail

struct ManifestOptions {
  // Reject unknown keys and require media files to exist.
  bool strict = false;
};

inline SampleRecord parse_manifest_record(const nlohmann::json& j, bool strict) {
  if (!j.is_object()) throw data_error("record is not a JSON object");
  if (strict) {
    for (const auto& [key, _] : j.items()) {
      if (!detail::manifest_keys().count(key)) throw data_error("unknown key '" + key + "'");
    }
  }
  SampleRecord r;
  r.sample_id = detail::required_string(j, "sample_id");
  r.media_path = detail::required_string(j, "media_path");
  const auto label = detail::required_string(j, "label");
  if (label == "bonafide") {
    r.label = Label::bonafide;
  } else if (label == "attack") {
    r.label = Label::attack;
  } else {
    throw data_error("label must be 'bonafide' or 'attack', got '" + label + "'");
  }
  r.attack_type = detail::optional_string(j, "attack_type");
  r.subject_id = detail::required_string(j, "subject_id");
  const auto split = detail::required_string(j, "split");
  auto s = split_from_string(split);
  if (!s) throw data_error("unknown split '" + split + "'");
  r.split = *s;
  r.dataset_name = detail::required_string(j, "dataset_name");
  r.landmarks_path = detail::optional_string(j, "landmarks_path");

  if (r.label == Label::attack && !r.attack_type)
    throw data_error("sample '" + r.sample_id + "': attack without attack_type");
  if (r.label == Label::bonafide && r.attack_type)
    throw data_error("sample '" + r.sample_id + "': bonafide sample carries attack_type");
  return r;
}

inline nlohmann::json to_json(const SampleRecord& r) {
  nlohmann::json j;
  j["sample_id"] = r.sample_id;
  j["media_path"] = r.media_path;
  j["label"] = std::string(to_string(r.label));
  j["attack_type"] = r.attack_type ? nlohmann::json(*r.attack_type) : nlohmann::json(nullptr);
  j["subject_id"] = r.subject_id;
  j["split"] = std::string(to_string(r.split));
  j["dataset_name"] = r.dataset_name;
  j["landmarks_path"] =
      r.landmarks_path ? nlohmann::json(*r.landmarks_path) : nlohmann::json(nullptr);
  return j;
}

inline void validate_manifest(const DatasetManifest& m) {
  if (m.records.empty()) throw data_error("manifest is empty");
  std::set<std::string> ids;
  for (const auto& r : m.records) {
    if (!ids.insert(r.sample_id).second)
      throw data_error("duplicate sample_id '" + r.sample_id + "'");
    if (r.dataset_name != m.dataset_name)
      throw data_error("sample '" + r.sample_id + "' belongs to dataset '" + r.dataset_name +
                       "', manifest is '" + m.dataset_name + "'");
    if ((r.label == Label::attack) != r.attack_type.has_value())
      throw data_error("sample '" + r.sample_id + "': attack_type present iff label = attack");
  }
}

// Parses a JSON-Lines manifest. Relative media/landmark paths are resolved
// against the manifest's own directory. Blank lines are skipped.
inline DatasetManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir,
                                      const ManifestOptions& opts = {}) {
  DatasetManifest m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      auto rec = parse_manifest_record(j, opts.strict);
      rec.media_path = detail::resolve_relative(base_dir, rec.media_path);
      if (rec.landmarks_path)
        rec.landmarks_path = detail::resolve_relative(base_dir, *rec.landmarks_path);
      if (opts.strict && !std::filesystem::exists(rec.media_path))
        throw data_error("missing media file '" + rec.media_path + "'");
      if (m.records.empty()) m.dataset_name = rec.dataset_name;
      m.records.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw data_error("manifest line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw data_error("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate_manifest(m);
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path,
                                     const ManifestOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read manifest '" + path.string() + "'");
  try {
    return parse_manifest(in, path.parent_path(), opts);
  } catch (const Error& e) {
    throw data_error(path.string() + ": " + e.what());
  }
}

// Writes records verbatim (paths are not relativized).
inline void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write manifest '" + path.string() + "'");
  for (const auto& r : m.records) out << to_json(r).dump() << '\n';
}

}  // namespace pad
