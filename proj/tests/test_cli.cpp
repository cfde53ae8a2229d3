#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "pad/cli/cli.hpp"

using namespace pad;
namespace fs = std::filesystem;

namespace {

struct Result {
  int rc;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "padctl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  auto* old = std::cout.rdbuf(out.rdbuf());
  const int rc = cli::dispatch(int(argv.size()), argv.data(), err);
  std::cout.rdbuf(old);
  return {rc, out.str(), err.str()};
}

// Tiny synthetic dataset plus its generated run.cfg.
struct TinyDataset {
  oracle::TempDir dir{"padcli"};
  fs::path cfg() const { return dir.path / "run.cfg"; }
  TinyDataset() {
    const auto r = run({"synth", "--out", dir.path.string(), "--subjects", "4", "--videos", "2",
                        "--frames", "2", "--seed", "5"});
    EXPECT_EQ(r.rc, 0) << r.err;
  }
};

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).rc, 1);
  EXPECT_EQ(run({"train"}).rc, 1);  // --config is required
  EXPECT_EQ(run({"evaluate", "--config", "x.cfg", "--bogus"}).rc, 1);
  EXPECT_EQ(run({"nosuchcommand"}).rc, 1);
  EXPECT_EQ(run({"evaluate", "--config", "x.cfg", "--format", "xml"}).rc, 1);
  EXPECT_EQ(run({"--help"}).rc, 0);
}

TEST(Cli, MissingConfigIsUsageError) {
  const auto r = run({"align", "--config", "/nonexistent/run.cfg"});
  EXPECT_EQ(r.rc, 1) << r.err;
}

TEST(Cli, UnknownConfigKeyIsUsageError) {
  oracle::TempDir tmp;
  write_text_atomic(tmp.path / "bad.cfg", "[run]\nsede = 3\n");
  const auto r = run({"align", "--config", (tmp.path / "bad.cfg").string()});
  EXPECT_EQ(r.rc, 1) << r.err;
  EXPECT_NE(r.err.find("sede"), std::string::npos);
}

TEST(Cli, StrictComputeMapsNamesMisSizedDepthFile) {
  TinyDataset ds;
  const auto m = load_manifest(ds.dir.path / "manifest.jsonl");
  const auto bad = ds.dir.path / "depth" / m.records[0].sample_id / "1.pfm";
  write_pfm(bad, FloatImage(8, 8, 1, 0.25f));
  const auto r = run({"compute-maps", "--config", ds.cfg().string(), "--strict"});
  EXPECT_EQ(r.rc, 2);
  EXPECT_NE(r.err.find(bad.string()), std::string::npos) << r.err;
  // Without --strict the map is resized with a warning.
  const auto lenient = run({"compute-maps", "--config", ds.cfg().string()});
  EXPECT_EQ(lenient.rc, 0) << lenient.err;
}

TEST(Cli, StagesEvaluateAndReport) {
  TinyDataset ds;
  const auto cfg = ds.cfg().string();
  for (const char* stage : {"extract-frames", "align", "compute-maps", "extract-features"}) {
    const auto r = run({stage, "--config", cfg});
    ASSERT_EQ(r.rc, 0) << stage << ": " << r.err;
  }
  EXPECT_TRUE(fs::exists(ds.dir.path / "cache" / "features"));

  const auto tr = run({"train", "--config", cfg});
  ASSERT_EQ(tr.rc, 0) << tr.err;
  const auto ev = run({"evaluate", "--config", cfg, "--format", "csv"});
  ASSERT_EQ(ev.rc, 0) << ev.err;
  EXPECT_EQ(ev.out.rfind("method,attack_type,hter", 0), 0u) << ev.out;

  const auto rep_dir = ds.dir.path / "reports" / "intra_synth_to_synth";
  for (const char* f : {"report.json", "report.txt", "report.csv"})
    EXPECT_TRUE(fs::exists(rep_dir / f)) << f;

  const auto again = run({"evaluate", "--config", cfg, "--format", "json"});
  ASSERT_EQ(again.rc, 0);
  EXPECT_EQ(report_from_json(nlohmann::json::parse(again.out)),
            report_from_json(nlohmann::json::parse(read_text_file(rep_dir / "report.json"))));

  const auto text = run({"report", rep_dir.string()});
  EXPECT_EQ(text.rc, 0);
  EXPECT_NE(text.out.find("Fused"), std::string::npos);

  // A report from a different configuration refuses to merge unless forced.
  auto other = report_from_json(nlohmann::json::parse(read_text_file(rep_dir / "report.json")));
  other.config_digest = std::string(64, 'f');
  const auto other_path = ds.dir.path / "other.json";
  write_text_atomic(other_path, to_json(other).dump());
  const auto clash = run({"report", rep_dir.string(), other_path.string()});
  EXPECT_EQ(clash.rc, 2);
  const auto forced = run({"report", "--force", "--format", "csv", rep_dir.string(), other_path.string()});
  EXPECT_EQ(forced.rc, 0);
  std::size_t headers = 0;
  for (std::size_t p = 0; (p = forced.out.find("method,attack_type", p)) != std::string::npos; ++p)
    ++headers;
  EXPECT_EQ(headers, 1u);
}

TEST(Cli, CacheDirFromEnvironment) {
  TinyDataset ds;
  oracle::TempDir cache;
  setenv("PAD_CACHE_DIR", cache.path.c_str(), 1);
  const auto r = run({"extract-frames", "--config", ds.cfg().string()});
  unsetenv("PAD_CACHE_DIR");
  EXPECT_EQ(r.rc, 0) << r.err;
  EXPECT_TRUE(fs::exists(cache.path / "frames"));
  EXPECT_FALSE(fs::exists(ds.dir.path / "cache"));
}

TEST(Cli, ReportMissingFileIsDataError) {
  EXPECT_EQ(run({"report", "/nonexistent/report.json"}).rc, 2);
}
