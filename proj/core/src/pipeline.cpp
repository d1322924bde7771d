#include "curate/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace curate {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// --- resources ---------------------------------------------------------------

std::unordered_map<std::string, std::vector<TextPolygon>> read_detector_sidecar(std::istream& in) {
  std::unordered_map<std::string, std::vector<TextPolygon>> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto id = j.at("id").get<std::string>();
      std::vector<TextPolygon> polys;
      for (const auto& pj : j.at("polygons")) {
        TextPolygon p;
        p.confidence = pj.at("confidence").get<double>();
        for (const auto& pt : pj.at("points")) {
          if (!pt.is_array() || pt.size() != 2) throw DataError("points must be [x, y] pairs");
          p.vertices.push_back({pt[0].get<double>(), pt[1].get<double>()});
        }
        polys.push_back(std::move(p));
      }
      if (!out.emplace(id, std::move(polys)).second) throw DataError("duplicate id '" + id + "'");
    } catch (const json::exception& e) {
      throw DataError("detector sidecar line " + std::to_string(n) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("detector sidecar line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::shared_ptr<StageResources> StageResources::load(const PipelineConfig& cfg) {
  auto res = std::make_shared<StageResources>();
  if (!cfg.score.aesthetic_sidecar.empty()) {
    res->aesthetic_ = std::make_shared<SidecarAestheticSource>(fs::path(cfg.score.aesthetic_sidecar));
  } else if (!cfg.score.aesthetic_endpoint.empty()) {
    HttpClientOptions opts;
    opts.max_in_flight = std::max<std::size_t>(1, cfg.workers);
    res->aesthetic_ = std::make_shared<CachedAestheticSource>(
        std::make_shared<HttpAestheticClient>(cfg.score.aesthetic_endpoint, opts));
  }
  if (!cfg.score.detector_sidecar.empty()) {
    std::ifstream in(cfg.score.detector_sidecar);
    if (!in) throw IoError("cannot open detector sidecar " + cfg.score.detector_sidecar);
    res->detections_ = read_detector_sidecar(in);
    res->has_detector_ = true;
  }
  return res;
}

const std::vector<TextPolygon>* StageResources::polygons(const std::string& id) const {
  auto it = detections_.find(id);
  return it == detections_.end() ? nullptr : &it->second;
}

// --- per-record stage logic ----------------------------------------------------

namespace {

struct RecordResult {
  std::optional<ManifestRecord> record;  // what to write, if anything
  std::string error;                     // data error; the record is dropped
};

std::string strip_file_scheme(const std::string& uri) {
  constexpr std::string_view kFile = "file://";
  return uri.rfind(kFile, 0) == 0 ? uri.substr(kFile.size()) : uri;
}

std::vector<Reason> defect_reasons(const ValidationReport& report) {
  std::vector<Reason> out;
  const bool malformed = std::any_of(report.issues.begin(), report.issues.end(), [](const CaptionIssue& i) {
    return i.kind != IssueKind::repetition_loop && i.kind != IssueKind::overlength;
  });
  if (malformed) out.push_back(Reason::caption_malformed);
  if (report.has(IssueKind::repetition_loop)) out.push_back(Reason::caption_repetition);
  if (report.has(IssueKind::overlength)) out.push_back(Reason::caption_overlength);
  return out;
}

void mark_defective(ManifestRecord& r, std::vector<Reason> reasons) {
  r.outcome = FilterOutcome::defective(std::move(reasons));
}

// Caption text of a record, falling back to the structured slots.
std::optional<std::string> caption_text(const ManifestRecord& r) {
  if (r.caption_raw) return r.caption_raw;
  if (r.caption_structured) return render(*r.caption_structured, MarkerStyle::numeric);
  return std::nullopt;
}

void prefilter_record(ManifestRecord& r, const PipelineConfig& cfg) {
  if (!r.width || !r.height) throw DataError("missing width/height");
  PrefilterResult res = passes_prefilter(*r.width, *r.height, cfg.geometry);
  if (!res.passed) r.outcome = FilterOutcome::rejected(std::move(res.reasons));
}

void score_record(ManifestRecord& r, const PipelineConfig& cfg, const StageResources& res) {
  if (AestheticSource* source = res.aesthetic()) {
    try {
      r.scores.aesthetic = source->fetch(r.id, r.uri);
    } catch (const DataError&) {
      // Not in the sidecar: leave unscored, the filter stage reports it.
    }
  }
  if (cfg.score.luminance) {
    const RgbImage image = read_ppm(fs::path(strip_file_scheme(r.uri)));
    if (r.width && r.height && (image.width() != *r.width || image.height() != *r.height)) {
      throw DataError("image is " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                      " but the record says " + std::to_string(*r.width) + "x" + std::to_string(*r.height));
    }
    r.width = image.width();
    r.height = image.height();
    const std::uint32_t target = cfg.geometry.crop_target;
    if (image.width() >= target && image.height() >= target) {
      r.scores.luminance = luminance_score(apply_crop(image, center_crop_rect(image.width(), image.height(), target)));
    } else {
      r.scores.luminance = luminance_score(image);
    }
  }
  if (cfg.score.ocr) {
    if (const auto* polys = res.polygons(r.id)) {
      if (!r.width || !r.height) throw DataError("ocr score needs width/height");
      r.scores.ocr = ocr_score(*polys, cfg.filter);
    }
  }
}

void filter_record(ManifestRecord& r, const PipelineConfig& cfg) {
  try {
    r.outcome = keep_decision(r.scores, cfg.filter);
  } catch (const DomainError& e) {
    throw DataError(e.what());
  }
}

void validate_record(ManifestRecord& r, const PipelineConfig& cfg) {
  const auto text = caption_text(r);
  if (!text) {
    mark_defective(r, {Reason::caption_malformed});
    return;
  }
  const ValidationReport report = detect_defect(*text, cfg.defects);
  if (!report.well_formed()) {
    mark_defective(r, defect_reasons(report));
    return;
  }
  ParseResult parsed = parse_caption(*text);
  r.caption_structured = std::move(parsed.parsed->caption);
}

void shuffle_record(ManifestRecord& r, const PipelineConfig& cfg) {
  MarkerStyle style = MarkerStyle::numeric;
  if (r.caption_raw) {
    ParseResult parsed = parse_caption(*r.caption_raw);
    if (!parsed) {
      mark_defective(r, {Reason::caption_malformed});
      return;
    }
    style = parsed.parsed->style;
    if (!r.caption_structured) r.caption_structured = parsed.parsed->caption;
  }
  if (!r.caption_structured) {
    mark_defective(r, {Reason::caption_malformed});
    return;
  }
  // Slots stay canonical; the shuffled rendering plus g goes to the record.
  ShuffledCaption s = shuffle(*r.caption_structured, random_permutation(cfg.seed, r.id), style);
  r.caption_raw = std::move(s.text);
  r.permutation = s.permutation;
}

void canonicalize_record(ManifestRecord& r) {
  if (!r.permutation || !r.caption_raw) return;  // already canonical
  ParseResult parsed = parse_caption(*r.caption_raw);
  if (!parsed) {
    mark_defective(r, {Reason::caption_malformed});
    return;
  }
  StructuredCaption c = canonicalize(*r.caption_raw, *r.permutation);
  r.caption_raw = render(c, parsed.parsed->style);
  r.caption_structured = std::move(c);
  r.permutation.reset();
}

void rewrite_record(ManifestRecord& r) {
  const auto text = caption_text(r);
  if (!text) {
    mark_defective(r, {Reason::caption_malformed});
    return;
  }
  try {
    r.caption_raw = rewrite_markers(*text);
  } catch (const CaptionError&) {
    mark_defective(r, {Reason::caption_malformed});
  }
}

RecordResult process_record(StageKind kind, const PipelineConfig& cfg, const StageResources& res,
                            const ManifestRecord& in) {
  if (!in.outcome.live()) return {cfg.keep_rejected ? std::optional(in) : std::nullopt, {}};
  ManifestRecord r = in;
  try {
    switch (kind) {
      case StageKind::prefilter: prefilter_record(r, cfg); break;
      case StageKind::score: score_record(r, cfg, res); break;
      case StageKind::filter: filter_record(r, cfg); break;
      case StageKind::caption_validate: validate_record(r, cfg); break;
      case StageKind::caption_shuffle: shuffle_record(r, cfg); break;
      case StageKind::caption_canonicalize: canonicalize_record(r); break;
      case StageKind::caption_rewrite: rewrite_record(r); break;
    }
  } catch (const DataError& e) {
    return {std::nullopt, e.what()};
  } catch (const DomainError& e) {
    return {std::nullopt, e.what()};
  } catch (const IoError& e) {
    return {std::nullopt, e.what()};
  }
  if (!r.outcome.live() && !cfg.keep_rejected) return {std::nullopt, {}};
  return {std::move(r), {}};
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. The exception from
// the lowest failing index is rethrown, so failures are worker-count stable.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(mutex);
            if (i < failed_at) {
              failed_at = i;
              failure = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

constexpr std::size_t kBatch = 2048;

}  // namespace

StageStats run_stage(StageKind kind, const PipelineConfig& cfg, StageResources& resources, std::istream& in,
                     std::ostream& out) {
  StageStats stats;
  stats.stage = std::string(to_string(kind));
  ManifestReader reader(in, cfg.error_budget);
  ManifestWriter writer(out);
  std::vector<std::string> record_errors;

  std::vector<ManifestRecord> batch;
  std::vector<RecordResult> results;
  for (;;) {
    batch.clear();
    while (batch.size() < kBatch) {
      auto r = reader.next();
      if (!r) break;
      batch.push_back(std::move(*r));
    }
    if (batch.empty()) break;

    results.assign(batch.size(), RecordResult{});
    parallel_for(batch.size(), cfg.workers,
                 [&](std::size_t i) { results[i] = process_record(kind, cfg, resources, batch[i]); });

    // Reorder buffer: results are committed strictly in input order.
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (batch[i].outcome.live()) ++stats.input;
      if (!results[i].error.empty()) record_errors.push_back("record '" + batch[i].id + "': " + results[i].error);
      if (results[i].record) {
        writer.write(*results[i].record);
        ++stats.written;
        if (results[i].record->outcome.live()) ++stats.output;
      }
    }
    const std::size_t total_errors = reader.errors().size() + record_errors.size();
    if (total_errors > cfg.error_budget) {
      const std::string first = record_errors.empty() ? reader.errors().front().message : record_errors.front();
      throw DataError("stage " + stats.stage + ": " + std::to_string(total_errors) + " data errors exceed budget " +
                      std::to_string(cfg.error_budget) + "; first: " + first);
    }
  }
  if (!reader.duplicate_ids().empty()) throw DuplicateIdError(reader.duplicate_ids());
  for (const auto& e : reader.errors()) stats.errors.push_back("line " + std::to_string(e.line) + ": " + e.message);
  stats.errors.insert(stats.errors.end(), record_errors.begin(), record_errors.end());
  return stats;
}

// --- analytics over manifests --------------------------------------------------

namespace {

std::optional<double> metric_value(const ManifestRecord& r, Metric m) {
  switch (m) {
    case Metric::aesthetic: return r.scores.aesthetic;
    case Metric::luminance: return r.scores.luminance;
    case Metric::ocr: return r.scores.ocr;
  }
  return std::nullopt;
}

template <class Fn>
void for_each_value(const fs::path& manifest, Metric metric, std::size_t budget, Fn&& fn) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest.string());
  ManifestReader reader(in, budget);
  while (auto r = reader.next()) {
    if (!r->outcome.live()) continue;
    if (auto v = metric_value(*r, metric)) fn(*v);
  }
}

}  // namespace

BucketReport bucket_metric(const fs::path& manifest, const BucketJob& job, std::size_t workers,
                           std::size_t error_budget) {
  BucketSpec spec{job.k, 0.0, 1.0};
  if (job.range) {
    spec.low = job.range->first;
    spec.high = job.range->second;
  } else {
    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    for_each_value(manifest, job.metric, error_budget, [&](double v) {
      lo = any ? std::min(lo, v) : v;
      hi = any ? std::max(hi, v) : v;
      any = true;
    });
    if (any) {
      spec.low = lo;
      spec.high = lo == hi ? lo + 1.0 : hi;
    }
  }

  workers = std::max<std::size_t>(1, workers);
  std::vector<BucketAccumulator> shards(workers, BucketAccumulator(spec, RangePolicy::count_separately));
  std::vector<double> batch;
  auto flush = [&] {
    const std::size_t per = (batch.size() + workers - 1) / workers;
    parallel_for(workers, workers, [&](std::size_t w) {
      const std::size_t b = std::min(batch.size(), w * per);
      const std::size_t e = std::min(batch.size(), b + per);
      for (std::size_t i = b; i < e; ++i) shards[w].add(batch[i]);
    });
    batch.clear();
  };
  for_each_value(manifest, job.metric, error_budget, [&](double v) {
    batch.push_back(v);
    if (batch.size() == kBatch * 4) flush();
  });
  flush();
  for (std::size_t w = 1; w < shards.size(); ++w) shards.front().merge(shards[w]);
  return shards.front().report(std::string(to_string(job.metric)), job.sample_std);
}

// --- digests / checkpoint --------------------------------------------------------

std::string digest_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return digest_hex(buf.str());
}

std::string config_fingerprint(const PipelineConfig& cfg) {
  ordered_json j;
  ordered_json stages = ordered_json::array();
  for (StageKind s : cfg.stages) stages.push_back(to_string(s));
  j["stages"] = stages;
  j["seed"] = cfg.seed;
  j["error_budget"] = cfg.error_budget;
  j["keep_rejected"] = cfg.keep_rejected;
  j["geometry"] = {{"min_side", cfg.geometry.min_side},
                   {"aspect_threshold", cfg.geometry.aspect_threshold},
                   {"crop_target", cfg.geometry.crop_target}};
  j["filter"] = {{"aesthetic_min", cfg.filter.aesthetic_min},   {"luminance_low", cfg.filter.luminance_low},
                 {"luminance_high", cfg.filter.luminance_high}, {"ocr_low_cut", cfg.filter.ocr_low_cut},
                 {"ocr_high_cut", cfg.filter.ocr_high_cut},     {"detector_side", cfg.filter.detector_side},
                 {"confidence_min", cfg.filter.confidence_min}, {"strict_polygons", cfg.filter.strict_polygons}};
  j["score"] = {{"luminance", cfg.score.luminance},
                {"ocr", cfg.score.ocr},
                {"aesthetic_sidecar", cfg.score.aesthetic_sidecar},
                {"aesthetic_endpoint", cfg.score.aesthetic_endpoint},
                {"detector_sidecar", cfg.score.detector_sidecar}};
  j["defects"] = {{"repeat_ratio", cfg.defects.repeat_ratio},
                  {"sentence_repeats", cfg.defects.sentence_repeats},
                  {"max_chars", cfg.defects.max_chars}};
  return j.dump();
}

int exit_code_for(const std::exception& e) noexcept {
  if (const auto* f = dynamic_cast<const StageFailure*>(&e)) return f->exit_code();
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return 1;
  if (dynamic_cast<const ClientError*>(&e) != nullptr) return 3;
  return 2;
}

StageFailure::StageFailure(std::string stage, std::string last_completed, std::string what, int exit_code)
    : std::runtime_error("stage '" + stage + "' failed (last completed: " +
                         (last_completed.empty() ? std::string("none") : last_completed) + "): " + what),
      stage_(std::move(stage)),
      last_completed_(std::move(last_completed)),
      exit_code_(exit_code) {}

namespace {

struct CheckpointEntry {
  std::string stage;
  std::string manifest;
  std::string digest;
  std::uint64_t input = 0;
  std::uint64_t output = 0;
};

struct Checkpoint {
  std::string input_digest;
  std::string config_digest;
  std::vector<CheckpointEntry> completed;
};

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void save_checkpoint(const fs::path& path, const Checkpoint& cp) {
  ordered_json j;
  j["input_digest"] = cp.input_digest;
  j["config_digest"] = cp.config_digest;
  ordered_json done = ordered_json::array();
  for (const auto& e : cp.completed) {
    done.push_back(ordered_json{{"stage", e.stage},
                                {"manifest", e.manifest},
                                {"digest", e.digest},
                                {"input", e.input},
                                {"output", e.output}});
  }
  j["completed"] = std::move(done);
  write_text(path, j.dump(2) + "\n");
}

std::optional<Checkpoint> load_checkpoint(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    Checkpoint cp;
    cp.input_digest = j.at("input_digest").get<std::string>();
    cp.config_digest = j.at("config_digest").get<std::string>();
    for (const auto& e : j.at("completed")) {
      cp.completed.push_back({e.at("stage").get<std::string>(), e.at("manifest").get<std::string>(),
                              e.at("digest").get<std::string>(), e.at("input").get<std::uint64_t>(),
                              e.at("output").get<std::uint64_t>()});
    }
    return cp;
  } catch (const json::exception&) {
    return std::nullopt;  // unreadable checkpoint: start over
  }
}

std::string stage_file_name(std::size_t index, StageKind kind) {
  std::ostringstream s;
  s << std::setw(2) << std::setfill('0') << index << '_' << to_string(kind) << ".jsonl";
  return s.str();
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const fs::path& input, const fs::path& out_dir,
                            const RunOptions& options) {
  if (auto v = validate_config(cfg); !v.empty()) {
    std::string msg = "invalid config:";
    for (const auto& s : v) msg += "\n  - " + s;
    throw ConfigError(msg);
  }
  if (!fs::exists(input)) throw DataError("input manifest " + input.string() + " does not exist");
  fs::create_directories(out_dir);

  Checkpoint cp;
  cp.input_digest = file_digest(input);
  cp.config_digest = digest_hex(config_fingerprint(cfg));
  const fs::path cp_path = out_dir / "checkpoint.json";
  std::vector<CheckpointEntry> previous;
  if (options.resume) {
    if (auto old = load_checkpoint(cp_path);
        old && old->input_digest == cp.input_digest && old->config_digest == cp.config_digest) {
      previous = std::move(old->completed);
    }
  }

  PipelineResult result;
  std::shared_ptr<StageResources> resources;
  fs::path current = input;
  std::string last_completed;

  for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
    const StageKind kind = cfg.stages[i];
    const std::string name(to_string(kind));
    const fs::path out_path = out_dir / stage_file_name(i, kind);

    const bool reusable = i < previous.size() && previous[i].stage == name && fs::exists(out_path) &&
                          file_digest(out_path) == previous[i].digest;
    if (reusable) {
      result.logbook.append(name, previous[i].input, previous[i].output);
      cp.completed.push_back(previous[i]);
      result.skipped.push_back(name);
    } else {
      previous.clear();  // later checkpoints depend on this stage's output
      try {
        if (!resources) resources = StageResources::load(cfg);
        std::ifstream in(current, std::ios::binary);
        if (!in) throw IoError("cannot open " + current.string());
        const fs::path tmp = out_path.string() + ".tmp";
        StageStats stats;
        {
          std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
          if (!out) throw IoError("cannot write " + tmp.string());
          stats = run_stage(kind, cfg, *resources, in, out);
          out.flush();
          if (!out) throw IoError("write failed for " + tmp.string());
        }
        fs::rename(tmp, out_path);
        result.logbook.append(name, stats.input, stats.output);
        cp.completed.push_back({name, out_path.filename().string(), file_digest(out_path), stats.input, stats.output});
      } catch (const std::exception& e) {
        std::error_code ignored;
        fs::remove(out_path.string() + ".tmp", ignored);
        save_checkpoint(cp_path, cp);
        write_text(out_dir / "logbook.json", result.logbook.to_json());
        throw StageFailure(name, last_completed, e.what(), exit_code_for(e));
      }
    }
    save_checkpoint(cp_path, cp);
    write_text(out_dir / "logbook.json", result.logbook.to_json());
    result.manifests.push_back(out_path);
    current = out_path;
    last_completed = name;
  }
  write_text(out_dir / "logbook.json", result.logbook.to_json());

  std::vector<std::string> used_names;
  for (const BucketJob& job : cfg.buckets) {
    fs::path source = current;
    if (!job.stage.empty()) {
      const auto it = std::find(cfg.stages.begin(), cfg.stages.end(), *stage_from_string(job.stage));
      source = result.manifests[static_cast<std::size_t>(it - cfg.stages.begin())];
    }
    try {
      BucketReport rep = bucket_metric(source, job, cfg.workers, cfg.error_budget);
      std::string base = "buckets_" + std::string(to_string(job.metric));
      if (std::find(used_names.begin(), used_names.end(), base) != used_names.end()) {
        base += "_" + (job.stage.empty() ? std::string("final") : job.stage);
      }
      used_names.push_back(base);
      write_text(out_dir / (base + ".json"), rep.to_json());
      write_text(out_dir / (base + ".txt"), rep.to_text());
      result.reports.push_back(std::move(rep));
    } catch (const std::exception& e) {
      throw StageFailure("buckets", last_completed, e.what(), exit_code_for(e));
    }
  }

  if (!cfg.eval.client.empty()) {
    try {
      std::ifstream in(current);
      ManifestReader reader(in, cfg.error_budget);
      std::vector<VqaPair> pairs;
      while (auto r = reader.next()) {
        if (!r->outcome.live()) continue;
        if (auto text = caption_text(*r)) pairs.push_back({r->id, r->uri, *text});
      }
      if (pairs.empty()) throw DataError("no captioned records to evaluate");
      auto client = make_vqa_client(cfg.eval.client);
      ScoreOptions opts;
      opts.model = cfg.eval.model;
      opts.concurrency = cfg.eval.concurrency;
      opts.exclude_gaps = cfg.eval.exclude_gaps;
      AlignmentReport rep = score_pairs(*client, pairs, opts);
      write_text(out_dir / "eval_report.json", rep.to_json());
      result.alignment = std::move(rep);
    } catch (const std::exception& e) {
      throw StageFailure("eval_vqa", last_completed, e.what(), exit_code_for(e));
    }
  }
  return result;
}

}  // namespace curate
