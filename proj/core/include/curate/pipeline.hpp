#pragma once

// Staged, resumable curation runs.
//
// Every stage reads the previous stage's manifest from disk and writes its
// own, so any stage can be rerun in isolation. Records are processed by a
// worker pool in input-index batches and written back in input order, which
// makes outputs byte-identical for any worker count.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "curate/analytics.hpp"
#include "curate/caption.hpp"
#include "curate/clients.hpp"
#include "curate/geometry.hpp"
#include "curate/manifest.hpp"
#include "curate/scoring.hpp"
#include "curate/vqa.hpp"

namespace curate {

enum class StageKind {
  prefilter,
  score,
  filter,
  caption_validate,
  caption_shuffle,
  caption_canonicalize,
  caption_rewrite,
};

std::string_view to_string(StageKind kind) noexcept;
std::optional<StageKind> stage_from_string(std::string_view name) noexcept;

struct ScoreStageConfig {
  bool luminance = false;  // decode the PPM behind `uri` (center-cropped)
  bool ocr = false;        // from the detector sidecar
  std::string aesthetic_sidecar;
  std::string aesthetic_endpoint;
  std::string detector_sidecar;
};

enum class Metric { aesthetic, luminance, ocr };
std::string_view to_string(Metric metric) noexcept;
std::optional<Metric> metric_from_string(std::string_view name) noexcept;

struct BucketJob {
  Metric metric = Metric::aesthetic;
  int k = 10;
  std::optional<std::pair<double, double>> range;  // data min/max when absent
  std::string stage;  // manifest to summarise; empty means the last stage
  bool sample_std = false;
};

struct EvalConfig {
  std::string client;  // "stub:<p>" or URL; empty disables the eval step
  std::string model = "model";
  std::size_t concurrency = 4;
  bool exclude_gaps = false;
};

struct PipelineConfig {
  std::vector<StageKind> stages{StageKind::prefilter, StageKind::score, StageKind::filter};
  GeometryConfig geometry;
  FilterConfig filter;
  ScoreStageConfig score;
  DefectThresholds defects;
  std::vector<BucketJob> buckets;
  EvalConfig eval;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t error_budget = 0;
  bool keep_rejected = false;  // write rejected/defective records through
};

// TOML. Unknown keys are ConfigErrors. Environment variables
// CURATE_AESTHETIC_ENDPOINT and CURATE_VQA_ENDPOINT override endpoints.
PipelineConfig parse_config(std::string_view toml_text);
PipelineConfig load_config(const std::filesystem::path& path);
void apply_env_overrides(PipelineConfig& cfg);

// Every invariant of every nested config. Report-only.
std::vector<std::string> validate_config(const PipelineConfig& cfg);

// Shared read-only state for the score stage (sidecars, clients).
class StageResources {
 public:
  static std::shared_ptr<StageResources> load(const PipelineConfig& cfg);

  AestheticSource* aesthetic() const noexcept { return aesthetic_.get(); }
  const std::vector<TextPolygon>* polygons(const std::string& id) const;
  bool has_detector() const noexcept { return has_detector_; }

  void set_aesthetic(std::shared_ptr<AestheticSource> source) { aesthetic_ = std::move(source); }

 private:
  std::shared_ptr<AestheticSource> aesthetic_;
  bool has_detector_ = false;
  std::unordered_map<std::string, std::vector<TextPolygon>> detections_;
};

// Lines of {"id": ..., "polygons": [{"points": [[x,y], ...], "confidence": c}]}.
std::unordered_map<std::string, std::vector<TextPolygon>> read_detector_sidecar(std::istream& in);

struct StageStats {
  std::string stage;
  std::uint64_t input = 0;   // live records read
  std::uint64_t output = 0;  // live records written
  std::uint64_t written = 0; // lines written, including pass-through rejects
  std::vector<std::string> errors;
};

// Streams one stage. Rejected/defective inputs pass through untouched when
// keep_rejected is set and are dropped otherwise. Throws DataError once the
// per-stage error count exceeds cfg.error_budget.
StageStats run_stage(StageKind kind, const PipelineConfig& cfg, StageResources& resources,
                     std::istream& in, std::ostream& out);

// Histogram of one score over the live records of a manifest. Without a
// fixed range, a first pass finds the data min/max. Values are accumulated
// in per-worker shards and merged.
BucketReport bucket_metric(const std::filesystem::path& manifest, const BucketJob& job, std::size_t workers = 1,
                           std::size_t error_budget = 0);

// Canonical description of every output-affecting setting (workers excluded).
std::string config_fingerprint(const PipelineConfig& cfg);

// 1 config, 2 data, 3 client; 2 for anything else. Used by the CLI too.
int exit_code_for(const std::exception& e) noexcept;

struct RunOptions {
  bool resume = false;
};

struct PipelineResult {
  StageLogbook logbook;
  std::vector<std::filesystem::path> manifests;  // one per stage
  std::vector<BucketReport> reports;
  std::optional<AlignmentReport> alignment;
  std::vector<std::string> skipped;  // stages reused from a checkpoint
};

// Thrown when a stage fails; names the last completed stage.
class StageFailure : public std::runtime_error {
 public:
  StageFailure(std::string stage, std::string last_completed, std::string what, int exit_code);
  const std::string& stage() const noexcept { return stage_; }
  const std::string& last_completed() const noexcept { return last_completed_; }
  int exit_code() const noexcept { return exit_code_; }

 private:
  std::string stage_;
  std::string last_completed_;
  int exit_code_;
};

// Writes NN_<stage>.jsonl, logbook.json, buckets_<metric>.json,
// eval_report.json and checkpoint.json into out_dir.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& input,
                            const std::filesystem::path& out_dir, const RunOptions& options = {});

// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);
std::string digest_hex(std::string_view bytes);

}  // namespace curate
