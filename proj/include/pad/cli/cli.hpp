#pragma once

// Command-line front end. Needs CLI11 on the include path (vendor/).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pad/core/manifest.hpp"
#include "pad/eval/runner.hpp"
#include "pad/pipeline/config.hpp"
#include "pad/pipeline/sample_pipeline.hpp"
#include "pad/synth/synthgen.hpp"

namespace pad::cli {

struct CommonOptions {
  std::string config;
  int jobs = 1;
  std::optional<std::int64_t> seed;
  bool strict = false;
  bool force = false;
  std::string format = "text";
  std::string protocol;
  std::vector<std::string> sets;
};

inline void add_common(CLI::App* sub, CommonOptions& o, bool needs_config) {
  auto* c = sub->add_option("--config", o.config, "run configuration file");
  if (needs_config) c->required();
  sub->add_option("--jobs", o.jobs, "parallel workers")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "override run.seed");
  sub->add_flag("--strict", o.strict, "treat recoverable data issues as errors");
  sub->add_flag("--force", o.force, "recompute cached stages / merge differing digests");
  sub->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  sub->add_option("--set", o.sets, "override a config key (section.key=value)");
}

inline RunConfig resolve_config(const CommonOptions& o) {
  RunConfig cfg = load_config(o.config);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw usage_error("--set expects key=value, got '" + kv + "'");
    cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (o.seed) cfg.set("run.seed", std::to_string(*o.seed));
  if (o.strict) cfg.set("run.strict", "true");
  if (!o.protocol.empty()) cfg.set("protocol.mode", o.protocol);
  return cfg;
}

inline std::filesystem::path cache_root(const RunConfig& cfg) {
  if (const char* env = std::getenv("PAD_CACHE_DIR"); env && *env) return env;
  return cfg.path("paths.cache_dir");
}

inline std::vector<DatasetManifest> load_manifests(const RunConfig& cfg) {
  const auto paths = cfg.manifest_paths();
  if (paths.empty()) throw usage_error("config sets no paths.manifests");
  std::vector<DatasetManifest> out;
  ManifestOptions opts;
  opts.strict = cfg.get_bool("run.strict");
  for (const auto& p : paths) out.push_back(load_manifest(p, opts));
  return out;
}

// Fills protocol.train / protocol.test when a single manifest makes them obvious.
inline ProtocolSpec protocol_for(const RunConfig& cfg, const std::vector<DatasetManifest>& ms) {
  ProtocolSpec spec = cfg.protocol();
  if (spec.train_datasets.empty() && ms.size() == 1)
    spec.train_datasets = {ms.front().dataset_name};
  if (spec.test_dataset.empty() && spec.mode == ProtocolMode::intra &&
      spec.train_datasets.size() == 1)
    spec.test_dataset = spec.train_datasets.front();
  if (spec.test_dataset.empty()) throw usage_error("protocol.test is not set");
  return spec;
}

inline std::string protocol_tag(const ProtocolSpec& spec) {
  std::string tag = spec.mode == ProtocolMode::intra ? "intra" : "inter";
  tag += "_";
  for (std::size_t i = 0; i < spec.train_datasets.size(); ++i)
    tag += (i ? "+" : "") + spec.train_datasets[i];
  return tag + "_to_" + spec.test_dataset;
}

inline int run_stage(Stage stage, const CommonOptions& o) {
  const auto cfg = resolve_config(o);
  const auto manifests = load_manifests(cfg);
  std::vector<SampleRecord> records;
  for (const auto& m : manifests) records.insert(records.end(), m.records.begin(), m.records.end());
  SampleProcessor proc(cfg, cache_root(cfg), o.force);
  parallel_for(records.size(), o.jobs, [&](std::size_t i) { proc.run_until(stage, records[i]); });
  std::cout << to_string(stage) << ": " << records.size() << " samples ready under "
            << (cache_root(cfg) / std::string(to_string(stage))).string() << "\n";
  return 0;
}

struct Trained {
  TrainedPipeline pipeline;
  ProtocolSpec spec;
  ResolvedProtocol resolved;
  RunSettings settings;
};

inline Trained train_from_config(const RunConfig& cfg, const CommonOptions& o,
                                 SampleProcessor& proc) {
  const auto manifests = load_manifests(cfg);
  Trained t;
  t.spec = protocol_for(cfg, manifests);
  t.resolved = resolve_protocol(t.spec, manifests);
  t.settings = cfg.run_settings(o.jobs);
  const auto provider = proc.provider();
  const auto train = gather_features(t.resolved.train, provider, o.jobs);
  const auto dev = gather_features(t.resolved.dev, provider, o.jobs);
  t.pipeline = train_pipeline(train, dev, t.settings);
  return t;
}

inline int cmd_train(const CommonOptions& o) {
  const auto cfg = resolve_config(o);
  SampleProcessor proc(cfg, cache_root(cfg), o.force);
  const auto t = train_from_config(cfg, o, proc);
  const auto dir = cfg.path("paths.model_dir") / protocol_tag(t.spec);
  save_pipeline(dir, t.pipeline);
  std::cout << "model written to " << dir.string() << " (digest " << cfg.digest().substr(0, 16)
            << ")\n";
  return 0;
}

inline int cmd_evaluate(const CommonOptions& o) {
  const auto cfg = resolve_config(o);
  SampleProcessor proc(cfg, cache_root(cfg), o.force);
  const auto manifests = load_manifests(cfg);
  const auto spec = protocol_for(cfg, manifests);
  const auto settings = cfg.run_settings(o.jobs);
  const auto model_dir = cfg.path("paths.model_dir") / protocol_tag(spec);

  // Reuse a saved model only when it was trained under the same config.
  TrainedPipeline tp;
  bool loaded = false;
  if (!o.force && std::filesystem::exists(model_dir / "pipeline.json")) {
    tp = load_pipeline(model_dir);
    loaded = tp.config_digest == settings.config_digest;
    if (!loaded) log_info("saved model digest differs; retraining");
  }
  if (!loaded) {
    tp = train_from_config(cfg, o, proc).pipeline;
    save_pipeline(model_dir, tp);
  }
  const auto resolved = resolve_protocol(spec, manifests);
  const auto test = gather_features(resolved.test, proc.provider(), o.jobs);
  const auto rep = build_report(tp, predict_samples(tp, test, o.jobs), summarize(spec), settings);

  const auto out_dir = cfg.path("paths.output_dir") / protocol_tag(spec);
  std::filesystem::create_directories(out_dir);
  write_text_atomic(out_dir / "report.json", to_json(rep).dump(2) + "\n");
  write_text_atomic(out_dir / "report.txt", render_text(rep));
  write_text_atomic(out_dir / "report.csv", render_csv(rep));
  std::cout << render_report(rep, report_format_from_string(o.format));
  return 0;
}

inline EvalReport read_report(std::filesystem::path p) {
  if (std::filesystem::is_directory(p)) p /= "report.json";
  try {
    return report_from_json(nlohmann::json::parse(read_text_file(p)));
  } catch (const nlohmann::json::exception& e) {
    throw data_error("malformed report '" + p.string() + "': " + e.what());
  }
}

inline int cmd_report(const CommonOptions& o, const std::vector<std::string>& inputs) {
  std::vector<EvalReport> reps;
  for (const auto& in : inputs) reps.push_back(read_report(in));
  for (std::size_t i = 1; i < reps.size(); ++i)
    if (reps[i].config_digest != reps[0].config_digest && !o.force)
      throw data_error("report '" + inputs[i] + "' has config digest " +
                       reps[i].config_digest.substr(0, 16) + " but '" + inputs[0] + "' has " +
                       reps[0].config_digest.substr(0, 16) + "; pass --force to merge anyway");
  const auto fmt = report_format_from_string(o.format);
  if (fmt == ReportFormat::json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reps) arr.push_back(to_json(r));
    std::cout << (reps.size() == 1 ? arr[0] : arr).dump(2) << "\n";
    return 0;
  }
  for (std::size_t i = 0; i < reps.size(); ++i) {
    auto text = render_report(reps[i], fmt);
    if (fmt == ReportFormat::csv && i > 0) text = text.substr(text.find('\n') + 1);
    if (fmt == ReportFormat::text && i > 0) std::cout << "\n";
    std::cout << text;
  }
  return 0;
}

struct SynthOptions {
  std::string out;
  SynthSpec spec;
};

// A ready-to-run config next to the generated data.
inline std::string synth_config_text(const SynthSpec& s) {
  return "# generated by padctl synth\n"
         "[paths]\n"
         "manifests = manifest.jsonl\n"
         "cache_dir = cache\n"
         "model_dir = models\n"
         "output_dir = reports\n\n"
         "[propmaps]\n"
         "depth_mode = precomputed\n"
         "depth_path = " + synth_depth_template() + "\n\n"
         "[protocol]\n"
         "mode = intra\n"
         "train = " + s.dataset_name + "\n"
         "test = " + s.dataset_name + "\n"
         "report_attack_types = print, mobile, highdef\n\n"
         "[run]\n"
         "seed = " + std::to_string(s.seed) + "\n";
}

inline int cmd_synth(const SynthOptions& so) {
  const auto m = generate_synthetic_dataset(so.spec, so.out);
  write_text_atomic(std::filesystem::path(so.out) / "run.cfg", synth_config_text(so.spec));
  std::cout << "synth: " << m.records.size() << " samples (" << m.count(Split::train) << " train, "
            << m.count(Split::dev) << " dev, " << m.count(Split::test) << " test) in " << so.out
            << "\n";
  return 0;
}

inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage: return 1;
    case ErrorKind::data: return 2;
    case ErrorKind::internal: return 3;
  }
  return 3;
}

inline int dispatch(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  CLI::App app{"face presentation-attack-detection pipeline", "padctl"};
  app.require_subcommand(1);

  CommonOptions o;
  std::vector<std::string> report_inputs;
  SynthOptions so;
  std::map<CLI::App*, std::function<int()>> actions;

  const std::pair<const char*, Stage> stages[] = {{"extract-frames", Stage::frames},
                                                  {"align", Stage::aligned},
                                                  {"compute-maps", Stage::maps},
                                                  {"extract-features", Stage::features}};
  for (const auto& [name, stage] : stages) {
    auto* sub = app.add_subcommand(name, std::string("run the pipeline up to the ") +
                                             std::string(to_string(stage)) + " stage");
    add_common(sub, o, true);
    actions[sub] = [&o, stage = stage] { return run_stage(stage, o); };
  }

  auto* train = app.add_subcommand("train", "train both classifier stages");
  add_common(train, o, true);
  train->add_option("--protocol", o.protocol, "intra or inter")
      ->check(CLI::IsMember({"intra", "inter"}));
  actions[train] = [&] { return cmd_train(o); };

  auto* evaluate = app.add_subcommand("evaluate", "train if needed and evaluate the test split");
  add_common(evaluate, o, true);
  evaluate->add_option("--protocol", o.protocol, "intra or inter")
      ->check(CLI::IsMember({"intra", "inter"}));
  actions[evaluate] = [&] { return cmd_evaluate(o); };

  auto* report = app.add_subcommand("report", "render or merge evaluation reports");
  add_common(report, o, false);
  report->add_option("reports", report_inputs, "report.json files or report directories")
      ->required();
  actions[report] = [&] { return cmd_report(o, report_inputs); };

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(synth, o, false);
  synth->add_option("--out", so.out, "output directory")->required();
  synth->add_option("--subjects", so.spec.n_subjects);
  synth->add_option("--videos", so.spec.videos_per_subject);
  synth->add_option("--frames", so.spec.frames_per_video);
  synth->add_option("--attack-fraction", so.spec.attack_fraction);
  synth->add_option("--name", so.spec.dataset_name);
  actions[synth] = [&] {
    if (o.seed) so.spec.seed = static_cast<std::uint64_t>(*o.seed);
    return cmd_synth(so);
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help requests print to stdout and succeed; every other parse error is a usage error.
    const int rc = app.exit(e, std::cout, err);
    return rc == 0 ? 0 : 1;
  }

  try {
    for (auto* sub : app.get_subcommands())
      if (auto it = actions.find(sub); it != actions.end()) return it->second();
    err << app.help();
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace pad::cli
