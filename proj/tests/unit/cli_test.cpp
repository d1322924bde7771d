#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

// Runs the curate binary from the sample directory, capturing stdout.
Outcome curate(const std::string& args) {
  const std::string cmd = "cd '" CURATE_SAMPLE_DIR "' && '" CURATE_CLI "' " + args + " 2>/dev/null";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return o;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) o.out.append(buf.data(), n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("curate_cli_" + std::string(
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_F(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(curate("--help").code, 0);
  EXPECT_EQ(curate("").code, 1);
  EXPECT_EQ(curate("frobnicate").code, 1);
}

TEST_F(Cli, PrefilterScoreFilterChain) {
  ASSERT_EQ(curate("prefilter --min-side 64 --crop 64 --in manifest.jsonl --out " + tmp("p.jsonl")).code, 0);
  ASSERT_EQ(curate("score --luminance --ocr --crop 64 --aesthetic-sidecar aesthetic.jsonl --detector-sidecar "
                   "detections.jsonl --in " + tmp("p.jsonl") + " --out " + tmp("s.jsonl")).code, 0);
  std::ofstream(tmp("filter.toml")) << "[filter]\naesthetic_min = 4.73\n";
  ASSERT_EQ(curate("filter --config " + tmp("filter.toml") + " --in " + tmp("s.jsonl") + " --out " + tmp("f.jsonl")).code, 0);
  const std::string scored = slurp(tmp("s.jsonl"));
  EXPECT_NE(scored.find("\"luminance\""), std::string::npos);
  EXPECT_LE(slurp(tmp("f.jsonl")).size(), scored.size());

  const auto b = curate("buckets --metric luminance --k 20 --range 0:255 --in " + tmp("s.jsonl") + " --text -");
  ASSERT_EQ(b.code, 0);
  EXPECT_NE(b.out.find("Standard Deviation"), std::string::npos);
}

TEST_F(Cli, CaptionOpsAndStats) {
  ASSERT_EQ(curate("caption validate --in manifest.jsonl --out " + tmp("v.jsonl")).code, 0);
  ASSERT_EQ(curate("caption shuffle --seed 3 --in " + tmp("v.jsonl") + " --out " + tmp("sh.jsonl")).code, 0);
  EXPECT_NE(slurp(tmp("sh.jsonl")).find("\"permutation\""), std::string::npos);
  ASSERT_EQ(curate("caption canonicalize --in " + tmp("sh.jsonl") + " --out " + tmp("c.jsonl")).code, 0);
  ASSERT_EQ(curate("caption rewrite --in " + tmp("c.jsonl") + " --out " + tmp("r.jsonl")).code, 0);
  EXPECT_NE(slurp(tmp("r.jsonl")).find("~1~"), std::string::npos);

  const auto words = curate("stats words --in manifest.jsonl --top 5");
  ASSERT_EQ(words.code, 0);
  EXPECT_EQ(nlohmann::json::parse(words.out).at("top").size(), 5u);
}

TEST_F(Cli, EvalVqa) {
  const auto r = curate("eval vqa --client stub:0.75 --pairs pairs.jsonl");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out).at("mean"), 0.75);
  EXPECT_EQ(curate("eval vqa --client http://127.0.0.1:9/vqa --pairs pairs.jsonl --exclude-gaps").code, 3);
  EXPECT_EQ(curate("eval vqa --client stub:7 --pairs pairs.jsonl").code, 1);
}

TEST_F(Cli, RunResumeAndLogbook) {
  const auto r = curate("run --config pipeline.toml --in manifest.jsonl --out-dir " + tmp("run"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("prefilter"), std::string::npos);
  const std::string first = slurp(tmp("run/05_caption_rewrite.jsonl"));
  ASSERT_EQ(curate("run --config pipeline.toml --in manifest.jsonl --resume --out-dir " + tmp("run")).code, 0);
  EXPECT_EQ(slurp(tmp("run/05_caption_rewrite.jsonl")), first);
  ASSERT_EQ(curate("run --config pipeline.toml --in manifest.jsonl --workers 4 --out-dir " + tmp("run4")).code, 0);
  EXPECT_EQ(slurp(tmp("run4/05_caption_rewrite.jsonl")), first);
  const auto show = curate("logbook show " + tmp("run"));
  ASSERT_EQ(show.code, 0);
  EXPECT_EQ(show.out, r.out.substr(0, show.out.size()));
}

TEST_F(Cli, ExitCodes) {
  std::ofstream(tmp("bad.toml")) << "[geometry]\naspect_threshold = 1.5\n";
  EXPECT_EQ(curate("run --config " + tmp("bad.toml") + " --in manifest.jsonl --out-dir " + tmp("x")).code, 1);
  std::ofstream(tmp("broken.jsonl")) << "{\"id\":\"a\",\"uri\":\"u\",\"width\":2000,\"height\":2000}\n{oops\n";
  EXPECT_EQ(curate("prefilter --in " + tmp("broken.jsonl") + " --out " + tmp("o.jsonl")).code, 2);
  EXPECT_FALSE(fs::exists(tmp("o.jsonl")));
  EXPECT_EQ(curate("prefilter --error-budget 1 --in " + tmp("broken.jsonl") + " --out " + tmp("o.jsonl")).code, 0);
  EXPECT_EQ(curate("score --aesthetic-endpoint http://127.0.0.1:9/score --in " + tmp("broken.jsonl") +
                   " --error-budget 1 --out " + tmp("s.jsonl")).code, 3);
}
