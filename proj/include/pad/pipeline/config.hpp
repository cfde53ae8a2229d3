#pragma once

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pad/classify/svm.hpp"
#include "pad/core/protocol.hpp"
#include "pad/eval/runner.hpp"
#include "pad/features/extractor.hpp"
#include "pad/preprocess/align.hpp"
#include "pad/propmaps/depth.hpp"
#include "pad/propmaps/illuminant.hpp"
#include "pad/propmaps/saliency.hpp"

namespace pad {

// Every recognised key with its default. Keys are "section.name".
inline const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> defaults = {
      {"paths.manifests", ""},
      {"paths.cache_dir", "cache"},
      {"paths.model_dir", "models"},
      {"paths.output_dir", "reports"},
      {"preprocess.rate_hz", "10"},
      {"preprocess.canonical_size", "224"},
      {"preprocess.eye_row_frac", "0.40"},
      {"preprocess.eye_dist_frac", "0.42"},
      {"preprocess.decoder_command", ""},
      {"preprocess.landmark_command", ""},
      {"propmaps.superpixels", "200"},
      {"propmaps.compactness", "10"},
      {"propmaps.slic_iterations", "10"},
      {"propmaps.sigma_clr", "10"},
      {"propmaps.sigma_bnd", "1"},
      {"propmaps.sigma_spa", "0.25"},
      {"propmaps.mu", "0.1"},
      {"propmaps.hough_bin", "0.01"},
      {"propmaps.intensity_low", "0.03"},
      {"propmaps.intensity_high", "0.98"},
      {"propmaps.depth_mode", "constant"},
      {"propmaps.depth_path", ""},
      {"propmaps.depth_command", ""},
      {"features.extractor", "fallback"},
      {"features.root", ""},
      {"features.command", ""},
      {"features.standardize", "false"},
      {"classifier.kernel", "rbf"},
      {"classifier.c", "1"},
      {"classifier.gamma", "auto"},
      {"classifier.tol", "0.001"},
      {"classifier.max_iter", "1000000"},
      {"classifier.class_weights", "false"},
      {"classifier.fusion_c", "1"},
      {"classifier.fusion_gamma", "auto"},
      {"classifier.fusion_mode", "pfv"},
      {"protocol.mode", "intra"},
      {"protocol.train", ""},
      {"protocol.test", ""},
      {"protocol.dev_source", "dev_split"},
      {"protocol.report_attack_types", ""},
      {"run.seed", "1"},
      {"run.strict", "false"},
  };
  return defaults;
}

// Keys that never influence results and are left out of the digest.
inline bool digest_excluded(const std::string& key) {
  return key == "paths.cache_dir" || key == "paths.model_dir" || key == "paths.output_dir";
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  return out;
}

// TOML-style subset: "[section]" headers, "key = value" lines, '#' comments,
// optional double quotes around values.
inline std::map<std::string, std::string> parse_config_text(const std::string& text,
                                                            const std::string& source = "config") {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw usage_error(source + ":" + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw usage_error(source + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

struct RunConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this
  std::map<std::string, std::string> values;  // defaults merged with file + overrides

  const std::string& get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw internal_error("unknown config key '" + key + "'");
    return it->second;
  }

  double get_double(const std::string& key) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(get(key), &used);
      if (used != get(key).size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw usage_error("config key '" + key + "' expects a number, got '" + get(key) + "'");
    }
  }

  long get_long(const std::string& key) const {
    const double v = get_double(key);
    if (v != std::floor(v)) throw usage_error("config key '" + key + "' expects an integer");
    return static_cast<long>(v);
  }

  bool get_bool(const std::string& key) const {
    const auto& v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no" || v.empty()) return false;
    throw usage_error("config key '" + key + "' expects true/false, got '" + v + "'");
  }

  std::filesystem::path path(const std::string& key) const {
    std::filesystem::path p(get(key));
    if (p.empty() || p.is_absolute()) return p;
    return (base_dir / p).lexically_normal();
  }

  void set(const std::string& key, const std::string& value) {
    if (!config_defaults().count(key)) throw usage_error("unknown config key '" + key + "'");
    values[key] = value;
  }

  // Canonical content hash (SHA-256 hex) over all result-affecting keys.
  std::string digest() const {
    std::string canon;
    for (const auto& [k, v] : values)
      if (!digest_excluded(k)) canon += k + "=" + v + "\n";
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(canon.data(), canon.size(), md, &len, EVP_sha256(), nullptr) != 1)
      throw internal_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
      out += hex[md[i] >> 4];
      out += hex[md[i] & 15];
    }
    return out;
  }

  // Typed views.
  AlignParams align() const {
    return {static_cast<int>(get_long("preprocess.canonical_size")),
            get_double("preprocess.eye_row_frac"), get_double("preprocess.eye_dist_frac")};
  }

  SlicParams slic() const {
    return {static_cast<int>(get_long("propmaps.superpixels")), get_double("propmaps.compactness"),
            static_cast<int>(get_long("propmaps.slic_iterations"))};
  }

  IlluminantParams illuminant() const {
    IlluminantParams p;
    p.intercept_bin = get_double("propmaps.hough_bin");
    p.intensity_low = get_double("propmaps.intensity_low");
    p.intensity_high = get_double("propmaps.intensity_high");
    return p;
  }

  SaliencyParams saliency() const {
    SaliencyParams p;
    p.boundary.sigma_clr = get_double("propmaps.sigma_clr");
    p.boundary.sigma_bnd = get_double("propmaps.sigma_bnd");
    p.sigma_spa = get_double("propmaps.sigma_spa");
    p.mu = get_double("propmaps.mu");
    return p;
  }

  DepthProviderConfig depth() const {
    DepthProviderConfig d;
    const auto& mode = get("propmaps.depth_mode");
    if (mode == "precomputed") d.mode = DepthMode::precomputed;
    else if (mode == "constant") d.mode = DepthMode::constant;
    else if (mode == "external") d.mode = DepthMode::external;
    else throw usage_error("unknown depth_mode '" + mode + "'");
    d.path_template = get("propmaps.depth_path");
    if (!d.path_template.empty() && std::filesystem::path(d.path_template).is_relative())
      d.path_template = (base_dir / d.path_template).lexically_normal().string();
    d.command_template = get("propmaps.depth_command");
    d.strict = get_bool("run.strict");
    if (d.mode == DepthMode::precomputed && d.path_template.empty())
      throw usage_error("depth_mode = precomputed needs propmaps.depth_path");
    return d;
  }

  ExtractorConfig extractor() const {
    ExtractorConfig e;
    const auto& mode = get("features.extractor");
    if (mode == "fallback") e.mode = ExtractorMode::fallback;
    else if (mode == "precomputed") e.mode = ExtractorMode::precomputed;
    else if (mode == "external") e.mode = ExtractorMode::external;
    else throw usage_error("unknown extractor '" + mode + "'");
    e.root = get("features.root").empty() ? std::string() : path("features.root").string();
    e.command = get("features.command");
    return e;
  }

  SvmParams stage1() const {
    SvmParams p;
    const auto& k = get("classifier.kernel");
    if (k == "rbf") p.kernel = KernelType::rbf;
    else if (k == "linear") p.kernel = KernelType::linear;
    else throw usage_error("unknown kernel '" + k + "'");
    p.c = get_double("classifier.c");
    p.gamma = get("classifier.gamma") == "auto" ? 0.0 : get_double("classifier.gamma");
    p.tol = get_double("classifier.tol");
    p.max_iter = get_long("classifier.max_iter");
    p.class_weights = get_bool("classifier.class_weights");
    p.standardize = get_bool("features.standardize");
    p.seed = seed();
    return p;
  }

  SvmParams fusion() const {
    SvmParams p = stage1();
    p.kernel = KernelType::rbf;
    p.standardize = false;
    p.c = get_double("classifier.fusion_c");
    p.gamma = get("classifier.fusion_gamma") == "auto" ? 0.0 : get_double("classifier.fusion_gamma");
    return p;
  }

  std::uint64_t seed() const { return static_cast<std::uint64_t>(get_long("run.seed")); }

  ProtocolSpec protocol() const {
    ProtocolSpec spec;
    const auto& mode = get("protocol.mode");
    if (mode == "intra") spec.mode = ProtocolMode::intra;
    else if (mode == "inter") spec.mode = ProtocolMode::inter;
    else throw usage_error("protocol.mode must be intra or inter");
    spec.train_datasets = split_list(get("protocol.train"));
    spec.test_dataset = get("protocol.test");
    const auto& dev = get("protocol.dev_source");
    if (dev == "dev_split") {
      spec.dev_source = DevSource::dev_split();
    } else if (dev.rfind("kfold:", 0) == 0) {
      try {
        spec.dev_source = DevSource::folds(std::stoi(dev.substr(6)));
      } catch (const std::exception&) {
        throw usage_error("bad dev_source '" + dev + "'");
      }
    } else {
      throw usage_error("dev_source must be dev_split or kfold:<k>");
    }
    spec.fold_seed = seed();
    return spec;
  }

  RunSettings run_settings(int jobs) const {
    RunSettings s;
    s.stage1 = stage1();
    s.fusion = fusion();
    s.fusion_mode = fusion_mode_from_string(get("classifier.fusion_mode"));
    s.seed = seed();
    s.config_digest = digest();
    s.jobs = jobs;
    s.report_attack_types = split_list(get("protocol.report_attack_types"));
    return s;
  }

  std::vector<std::filesystem::path> manifest_paths() const {
    std::vector<std::filesystem::path> out;
    for (const auto& m : split_list(get("paths.manifests"))) {
      std::filesystem::path p(m);
      out.push_back(p.is_absolute() ? p : (base_dir / p).lexically_normal());
    }
    return out;
  }
};

inline RunConfig make_config(const std::map<std::string, std::string>& file_values,
                             const std::filesystem::path& base_dir) {
  RunConfig cfg;
  cfg.base_dir = base_dir;
  cfg.values = config_defaults();
  for (const auto& [k, v] : file_values) cfg.set(k, v);
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return make_config(parse_config_text(ss.str(), path.string()),
                     std::filesystem::absolute(path).parent_path());
}

}  // namespace pad
