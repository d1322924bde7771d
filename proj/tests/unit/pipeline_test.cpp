#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "curate/errors.hpp"
#include "curate/pipeline.hpp"
#include "generators.hpp"

using namespace curate;
using namespace curate::testing;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("curate_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string manifest_text(const std::vector<ManifestRecord>& records) {
  std::ostringstream out;
  write_manifest(records, out);
  return out.str();
}

StageStats run_text(StageKind kind, const PipelineConfig& cfg, const std::string& in_text, std::string& out_text) {
  StageResources res;
  std::istringstream in(in_text);
  std::ostringstream out;
  auto stats = run_stage(kind, cfg, res, in, out);
  out_text = out.str();
  return stats;
}

std::vector<ManifestRecord> read_all(const std::string& text) {
  std::istringstream in(text);
  return load_manifest(in).records;
}

ManifestRecord captioned(const std::string& id, const std::string& caption) {
  ManifestRecord r;
  r.id = id;
  r.uri = "u";
  r.caption_raw = caption;
  return r;
}

}  // namespace

TEST(Config, DefaultsAreValid) {
  EXPECT_TRUE(validate_config(PipelineConfig{}).empty());
  const auto cfg = parse_config("");
  EXPECT_EQ(cfg.geometry.min_side, 1024u);
  EXPECT_EQ(cfg.geometry.aspect_threshold, 0.6666);
  EXPECT_EQ(cfg.filter.aesthetic_min, 4.73);
  EXPECT_EQ(cfg.filter.luminance_low, 12.75);
  EXPECT_EQ(cfg.filter.luminance_high, 204.0);
  EXPECT_EQ(cfg.filter.confidence_min, 0.7);
  EXPECT_EQ(cfg.filter.detector_side, 736u);
}

TEST(Config, ViolationsNameTheField) {
  auto cfg = parse_config("[filter]\nluminance_range = [204.0, 12.75]\n");
  auto v = validate_config(cfg);
  ASSERT_FALSE(v.empty());
  EXPECT_NE(v[0].find("luminance"), std::string::npos);

  cfg = parse_config("[geometry]\naspect_threshold = 1.5\n");
  v = validate_config(cfg);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("aspect_threshold"), std::string::npos);
}

TEST(Config, ParseErrors) {
  EXPECT_THROW(parse_config("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[filter]\nnot_a_key = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("stages = [\"prefilter\", \"teleport\"]\n"), ConfigError);
  EXPECT_THROW(parse_config("workers = \"many\"\n"), ConfigError);
  EXPECT_THROW(parse_config("[[buckets]]\nmetric = \"vibes\"\n"), ConfigError);
  EXPECT_THROW(parse_config("this is not toml"), ConfigError);
}

TEST(Config, StructuralChecks) {
  PipelineConfig cfg;
  cfg.stages = {StageKind::filter, StageKind::prefilter};
  EXPECT_FALSE(validate_config(cfg).empty());
  cfg.stages = {StageKind::caption_canonicalize, StageKind::caption_shuffle};
  EXPECT_FALSE(validate_config(cfg).empty());
  cfg.stages = {StageKind::caption_canonicalize};  // input shuffled by an earlier run
  EXPECT_TRUE(validate_config(cfg).empty());
  cfg.stages = {StageKind::prefilter};
  cfg.workers = 0;
  EXPECT_FALSE(validate_config(cfg).empty());
  cfg.workers = 1;
  cfg.score.aesthetic_sidecar = "/definitely/not/here.jsonl";
  EXPECT_FALSE(validate_config(cfg).empty());
  cfg.score = {};
  cfg.score.ocr = true;
  EXPECT_FALSE(validate_config(cfg).empty());
  cfg.score = {};
  cfg.eval.client = "stub:1.5";
  EXPECT_FALSE(validate_config(cfg).empty());
}

TEST(Config, FullFileAndEnvOverride) {
  const auto cfg = parse_config(R"(
stages = ["prefilter", "score", "filter", "caption_validate"]
seed = 9
workers = 3
error_budget = 2
[geometry]
min_side = 512
[filter]
aesthetic_min = 5.0
luminance_range = [10, 200]
[defects]
max_chars = 900
[[buckets]]
metric = "luminance"
k = 20
range = [0, 255]
[eval]
client = "stub:0.5"
)");
  EXPECT_EQ(cfg.stages.size(), 4u);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.workers, 3u);
  EXPECT_EQ(cfg.geometry.min_side, 512u);
  EXPECT_EQ(cfg.filter.luminance_high, 200.0);
  EXPECT_EQ(cfg.defects.max_chars, 900u);
  ASSERT_EQ(cfg.buckets.size(), 1u);
  EXPECT_EQ(cfg.buckets[0].k, 20);
  EXPECT_EQ(cfg.buckets[0].range, (std::pair<double, double>{0, 255}));

  PipelineConfig env_cfg;
  ::setenv("CURATE_VQA_ENDPOINT", "http://127.0.0.1:1/vqa", 1);
  apply_env_overrides(env_cfg);
  ::unsetenv("CURATE_VQA_ENDPOINT");
  EXPECT_EQ(env_cfg.eval.client, "http://127.0.0.1:1/vqa");
}

TEST(Stage, PrefilterRejectsAndDrops) {
  ManifestRecord ok, small, nodims;
  ok.id = "ok";
  ok.uri = small.uri = nodims.uri = "u";
  ok.width = 1024;
  ok.height = 1536;
  small.id = "small";
  small.width = 1023;
  small.height = 2048;
  nodims.id = "nodims";
  PipelineConfig cfg;
  std::string out;
  EXPECT_THROW(run_text(StageKind::prefilter, cfg, manifest_text({ok, small, nodims}), out), DataError);

  cfg.error_budget = 1;
  auto stats = run_text(StageKind::prefilter, cfg, manifest_text({ok, small, nodims}), out);
  EXPECT_EQ(stats.input, 3u);
  EXPECT_EQ(stats.output, 1u);
  EXPECT_EQ(stats.errors.size(), 1u);
  EXPECT_EQ(read_all(out).size(), 1u);

  cfg.keep_rejected = true;
  run_text(StageKind::prefilter, cfg, manifest_text({ok, small}), out);
  const auto recs = read_all(out);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].outcome.reasons, (std::vector<Reason>{Reason::min_size, Reason::aspect_ratio}));
}

TEST(Stage, ScoreFromImageAndSidecars) {
  TempDir dir;
  RgbImage img(6, 4, {10, 20, 30});
  img.at(0, 0) = {255, 255, 255};
  {
    std::ofstream out(dir.path() / "a.ppm", std::ios::binary);
    write_ppm(img, out);
  }
  spit(dir.path() / "aes.jsonl", "{\"id\":\"a\",\"aesthetic\":5.5}\n");
  spit(dir.path() / "det.jsonl",
       "{\"id\":\"a\",\"polygons\":[{\"points\":[[0,0],[368,0],[368,368],[0,368]],\"confidence\":0.8}]}\n");

  PipelineConfig cfg;
  cfg.geometry.crop_target = 4;
  cfg.score.luminance = true;
  cfg.score.ocr = true;
  cfg.score.aesthetic_sidecar = (dir.path() / "aes.jsonl").string();
  cfg.score.detector_sidecar = (dir.path() / "det.jsonl").string();
  ASSERT_TRUE(validate_config(cfg).empty());
  auto res = StageResources::load(cfg);

  ManifestRecord a;
  a.id = "a";
  a.uri = "file://" + (dir.path() / "a.ppm").string();
  std::istringstream in(manifest_text({a}));
  std::ostringstream out;
  run_stage(StageKind::score, cfg, *res, in, out);
  const auto r = read_all(out.str()).at(0);
  EXPECT_EQ(r.scores.aesthetic, 5.5);
  EXPECT_DOUBLE_EQ(*r.scores.ocr, 0.2);
  EXPECT_EQ(r.width, 6u);
  // Crop x offset 1 drops the bright corner pixel.
  EXPECT_DOUBLE_EQ(*r.scores.luminance, luminance_score(RgbImage(4, 4, {10, 20, 30})));
}

TEST(Stage, FilterMissingScoreIsDataError) {
  ManifestRecord r;
  r.id = "a";
  r.uri = "u";
  r.scores = {5.0, 100.0, std::nullopt};
  PipelineConfig cfg;
  std::string out;
  EXPECT_THROW(run_text(StageKind::filter, cfg, manifest_text({r}), out), DataError);
}

TEST(Stage, CaptionOpsChain) {
  PipelineConfig cfg;
  cfg.seed = 5;
  std::string loop = "1. ";
  for (int i = 0; i < 40; ++i) loop += "a vase with flowers, ";
  loop += "2. b 3. c 4. d";
  const std::string good = "1. Pi is 3.14.\n2. A room. 3. Warm. 4. Close-up.";
  std::string validated, shuffled, canon, rewritten;
  auto stats = run_text(StageKind::caption_validate, cfg,
                        manifest_text({captioned("g", good), captioned("loop", loop), captioned("bad", "1. x")}),
                        validated);
  EXPECT_EQ(stats.input, 3u);
  EXPECT_EQ(stats.output, 1u);
  auto recs = read_all(validated);
  ASSERT_EQ(recs.size(), 1u);
  ASSERT_TRUE(recs[0].caption_structured);
  EXPECT_EQ(recs[0].caption_structured->subject(), "Pi is 3.14.");

  run_text(StageKind::caption_shuffle, cfg, validated, shuffled);
  recs = read_all(shuffled);
  ASSERT_TRUE(recs[0].permutation);
  EXPECT_EQ(*recs[0].permutation, random_permutation(5, "g"));

  run_text(StageKind::caption_canonicalize, cfg, shuffled, canon);
  recs = read_all(canon);
  EXPECT_FALSE(recs[0].permutation);
  EXPECT_EQ(*recs[0].caption_raw, "1. Pi is 3.14. 2. A room. 3. Warm. 4. Close-up.");

  run_text(StageKind::caption_rewrite, cfg, canon, rewritten);
  EXPECT_EQ(*read_all(rewritten)[0].caption_raw, "~1~ Pi is 3.14. ~2~ A room. ~3~ Warm. ~4~ Close-up.");

  cfg.keep_rejected = true;
  run_text(StageKind::caption_validate, cfg, manifest_text({captioned("loop", loop)}), validated);
  recs = read_all(validated);
  EXPECT_EQ(recs[0].outcome.status, FilterStatus::defective);
  EXPECT_EQ(recs[0].outcome.reasons, (std::vector<Reason>{Reason::caption_repetition}));
}

TEST(Stage, DuplicateIdsAbort) {
  ManifestRecord r;
  r.id = "a";
  r.uri = "u";
  r.width = r.height = 2000;
  PipelineConfig cfg;
  std::string out;
  EXPECT_THROW(run_text(StageKind::prefilter, cfg, manifest_text({r, r}), out), DuplicateIdError);
}

TEST(Stage, WorkerCountDoesNotChangeOutput) {
  Rng rng(2);
  const std::string in = manifest_text(scored_records(rng, 5000));
  PipelineConfig cfg;
  cfg.keep_rejected = true;
  std::string one, many;
  run_text(StageKind::filter, cfg, in, one);
  cfg.workers = 8;
  run_text(StageKind::filter, cfg, in, many);
  EXPECT_EQ(one, many);
}

TEST(Pipeline, EmptyInput) {
  TempDir dir;
  spit(dir.path() / "in.jsonl", "");
  PipelineConfig cfg;
  const auto result = run_pipeline(cfg, dir.path() / "in.jsonl", dir.path() / "out");
  ASSERT_EQ(result.logbook.entries().size(), 3u);
  for (const auto& e : result.logbook.entries()) {
    EXPECT_EQ(e.input, 0u);
    EXPECT_EQ(e.output, 0u);
  }
  EXPECT_TRUE(slurp(result.manifests.back()).empty());
}

TEST(Pipeline, DeterministicResumableAndReported) {
  TempDir dir;
  Rng rng(77);
  auto records = scored_records(rng, 300);
  std::string sidecar;
  for (auto& r : records) {
    r.caption_raw = "1. A subject. 2. A setting. 3. Warm tones. 4. Wide shot.";
    sidecar += "{\"id\":\"" + r.id + "\",\"aesthetic\":" + std::to_string(*r.scores.aesthetic) + "}\n";
    r.scores.aesthetic.reset();
  }
  spit(dir.path() / "in.jsonl", manifest_text(records));
  spit(dir.path() / "aes.jsonl", sidecar);

  PipelineConfig cfg;
  cfg.score.aesthetic_sidecar = (dir.path() / "aes.jsonl").string();
  cfg.buckets.push_back({Metric::luminance, 20, std::pair{0.0, 255.0}, "score", false});
  cfg.buckets.push_back({Metric::aesthetic, 10, std::nullopt, "", false});
  cfg.eval.client = "stub:0.75";
  const auto a = run_pipeline(cfg, dir.path() / "in.jsonl", dir.path() / "a");
  cfg.workers = 4;
  const auto b = run_pipeline(cfg, dir.path() / "in.jsonl", dir.path() / "b");
  ASSERT_EQ(a.manifests.size(), 3u);
  for (std::size_t i = 0; i < a.manifests.size(); ++i) EXPECT_EQ(file_digest(a.manifests[i]), file_digest(b.manifests[i]));
  for (const auto* name : {"logbook.json", "buckets_luminance.json", "buckets_aesthetic.json", "eval_report.json"}) {
    EXPECT_EQ(slurp(dir.path() / "a" / name), slurp(dir.path() / "b" / name)) << name;
  }
  EXPECT_EQ(a.reports.at(0).total(), a.logbook.entries()[1].output);
  ASSERT_TRUE(a.alignment);
  EXPECT_EQ(a.alignment->mean, 0.75);

  const auto resumed = run_pipeline(cfg, dir.path() / "in.jsonl", dir.path() / "a", RunOptions{true});
  EXPECT_EQ(resumed.skipped.size(), 3u);
  EXPECT_EQ(resumed.logbook, a.logbook);

  // A changed threshold invalidates the checkpoint.
  cfg.filter.aesthetic_min = 5.0;
  const auto changed = run_pipeline(cfg, dir.path() / "in.jsonl", dir.path() / "a", RunOptions{true});
  EXPECT_TRUE(changed.skipped.empty());
}

TEST(Pipeline, FailureNamesLastCompletedStageAndResumes) {
  TempDir dir;
  Rng rng(1);
  auto records = scored_records(rng, 50);
  records[10].scores.ocr.reset();  // filter cannot decide this one
  records[10].width = records[10].height = 2000;
  spit(dir.path() / "in.jsonl", manifest_text(records));
  PipelineConfig cfg;
  try {
    run_pipeline(cfg, dir.path() / "in.jsonl", dir.path() / "out");
    FAIL();
  } catch (const StageFailure& f) {
    EXPECT_EQ(f.stage(), "filter");
    EXPECT_EQ(f.last_completed(), "score");
    EXPECT_EQ(f.exit_code(), 2);
  }
  EXPECT_TRUE(fs::exists(dir.path() / "out" / "checkpoint.json"));
  EXPECT_FALSE(fs::exists(dir.path() / "out" / "02_filter.jsonl.tmp"));
  cfg.error_budget = 1;  // new config digest, so everything reruns
  const auto ok = run_pipeline(cfg, dir.path() / "in.jsonl", dir.path() / "out", RunOptions{true});
  EXPECT_TRUE(ok.skipped.empty());
  EXPECT_EQ(ok.logbook.entries().size(), 3u);
}

TEST(Pipeline, InvalidConfigIsConfigError) {
  TempDir dir;
  spit(dir.path() / "in.jsonl", "");
  PipelineConfig cfg;
  cfg.geometry.aspect_threshold = 2;
  EXPECT_THROW(run_pipeline(cfg, dir.path() / "in.jsonl", dir.path() / "out"), ConfigError);
  EXPECT_EQ(exit_code_for(ConfigError("x")), 1);
  EXPECT_EQ(exit_code_for(DataError("x")), 2);
  EXPECT_EQ(exit_code_for(RetryableError("x")), 3);
}
