#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "curate/pipeline.hpp"

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

namespace curate {
namespace {

constexpr std::array<std::string_view, 7> kStageNames{
    "prefilter", "score", "filter", "caption_validate", "caption_shuffle", "caption_canonicalize", "caption_rewrite",
};
constexpr std::array<std::string_view, 3> kMetricNames{"aesthetic", "luminance", "ocr"};

void reject_unknown(const toml::table& table, std::initializer_list<std::string_view> allowed, std::string_view where) {
  for (const auto& [key, node] : table) {
    const std::string_view k = key.str();
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ConfigError("unknown key '" + std::string(k) + "' in " + std::string(where));
    }
  }
}

std::string key_path(std::string_view where, std::string_view key) {
  return where.empty() ? std::string(key) : std::string(where) + "." + std::string(key);
}

double read_double(const toml::node& node, std::string_view name) {
  if (auto v = node.as_floating_point()) return v->get();
  if (auto v = node.as_integer()) return static_cast<double>(v->get());
  throw ConfigError("'" + std::string(name) + "' must be a number");
}

std::int64_t read_int(const toml::node& node, std::string_view name) {
  if (auto v = node.as_integer()) return v->get();
  throw ConfigError("'" + std::string(name) + "' must be an integer");
}

std::uint64_t read_unsigned(const toml::node& node, std::string_view name) {
  const std::int64_t v = read_int(node, name);
  if (v < 0) throw ConfigError("'" + std::string(name) + "' must be >= 0");
  return static_cast<std::uint64_t>(v);
}

bool read_bool(const toml::node& node, std::string_view name) {
  if (auto v = node.as_boolean()) return v->get();
  throw ConfigError("'" + std::string(name) + "' must be a boolean");
}

std::string read_string(const toml::node& node, std::string_view name) {
  if (auto v = node.as_string()) return v->get();
  throw ConfigError("'" + std::string(name) + "' must be a string");
}

std::pair<double, double> read_range(const toml::node& node, std::string_view name) {
  const auto* arr = node.as_array();
  if (arr == nullptr || arr->size() != 2) throw ConfigError("'" + std::string(name) + "' must be [low, high]");
  return {read_double(*arr->get(0), name), read_double(*arr->get(1), name)};
}

template <class Fn>
void each(const toml::table& table, std::string_view where, Fn&& fn) {
  for (const auto& [key, node] : table) fn(key.str(), node, key_path(where, key.str()));
}

void read_geometry(const toml::table& t, GeometryConfig& g) {
  reject_unknown(t, {"min_side", "aspect_threshold", "crop_target"}, "[geometry]");
  each(t, "geometry", [&](std::string_view k, const toml::node& n, const std::string& name) {
    if (k == "min_side") g.min_side = static_cast<std::uint32_t>(read_unsigned(n, name));
    if (k == "aspect_threshold") g.aspect_threshold = read_double(n, name);
    if (k == "crop_target") g.crop_target = static_cast<std::uint32_t>(read_unsigned(n, name));
  });
}

void read_filter(const toml::table& t, FilterConfig& f) {
  reject_unknown(t,
                 {"aesthetic_min", "luminance_range", "ocr_low_cut", "ocr_high_cut", "detector_side", "confidence_min",
                  "strict_polygons"},
                 "[filter]");
  each(t, "filter", [&](std::string_view k, const toml::node& n, const std::string& name) {
    if (k == "aesthetic_min") f.aesthetic_min = read_double(n, name);
    if (k == "luminance_range") std::tie(f.luminance_low, f.luminance_high) = read_range(n, name);
    if (k == "ocr_low_cut") f.ocr_low_cut = read_double(n, name);
    if (k == "ocr_high_cut") f.ocr_high_cut = read_double(n, name);
    if (k == "detector_side") f.detector_side = static_cast<std::uint32_t>(read_unsigned(n, name));
    if (k == "confidence_min") f.confidence_min = read_double(n, name);
    if (k == "strict_polygons") f.strict_polygons = read_bool(n, name);
  });
}

void read_score(const toml::table& t, ScoreStageConfig& s) {
  reject_unknown(t, {"luminance", "ocr", "aesthetic_sidecar", "aesthetic_endpoint", "detector_sidecar"}, "[score]");
  each(t, "score", [&](std::string_view k, const toml::node& n, const std::string& name) {
    if (k == "luminance") s.luminance = read_bool(n, name);
    if (k == "ocr") s.ocr = read_bool(n, name);
    if (k == "aesthetic_sidecar") s.aesthetic_sidecar = read_string(n, name);
    if (k == "aesthetic_endpoint") s.aesthetic_endpoint = read_string(n, name);
    if (k == "detector_sidecar") s.detector_sidecar = read_string(n, name);
  });
}

void read_defects(const toml::table& t, DefectThresholds& d) {
  reject_unknown(t, {"repeat_ratio", "sentence_repeats", "max_chars"}, "[defects]");
  each(t, "defects", [&](std::string_view k, const toml::node& n, const std::string& name) {
    if (k == "repeat_ratio") d.repeat_ratio = read_double(n, name);
    if (k == "sentence_repeats") d.sentence_repeats = static_cast<int>(read_int(n, name));
    if (k == "max_chars") d.max_chars = static_cast<std::size_t>(read_unsigned(n, name));
  });
}

BucketJob read_bucket(const toml::table& t) {
  reject_unknown(t, {"metric", "k", "range", "stage", "sample_std"}, "[[buckets]]");
  BucketJob job;
  bool has_metric = false;
  each(t, "buckets", [&](std::string_view k, const toml::node& n, const std::string& name) {
    if (k == "metric") {
      auto m = metric_from_string(read_string(n, name));
      if (!m) throw ConfigError("buckets.metric must be one of aesthetic, luminance, ocr");
      job.metric = *m;
      has_metric = true;
    }
    if (k == "k") job.k = static_cast<int>(read_int(n, name));
    if (k == "range") job.range = read_range(n, name);
    if (k == "stage") job.stage = read_string(n, name);
    if (k == "sample_std") job.sample_std = read_bool(n, name);
  });
  if (!has_metric) throw ConfigError("[[buckets]] entry needs a metric");
  return job;
}

void read_eval(const toml::table& t, EvalConfig& e) {
  reject_unknown(t, {"client", "model", "concurrency", "exclude_gaps"}, "[eval]");
  each(t, "eval", [&](std::string_view k, const toml::node& n, const std::string& name) {
    if (k == "client") e.client = read_string(n, name);
    if (k == "model") e.model = read_string(n, name);
    if (k == "concurrency") e.concurrency = static_cast<std::size_t>(read_unsigned(n, name));
    if (k == "exclude_gaps") e.exclude_gaps = read_bool(n, name);
  });
}

const toml::table& as_table(const toml::node& node, std::string_view name) {
  const auto* t = node.as_table();
  if (t == nullptr) throw ConfigError("'" + std::string(name) + "' must be a table");
  return *t;
}

}  // namespace

std::string_view to_string(StageKind kind) noexcept { return kStageNames[static_cast<std::size_t>(kind)]; }

std::optional<StageKind> stage_from_string(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kStageNames.size(); ++i) {
    if (kStageNames[i] == name) return static_cast<StageKind>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Metric metric) noexcept { return kMetricNames[static_cast<std::size_t>(metric)]; }

std::optional<Metric> metric_from_string(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    if (kMetricNames[i] == name) return static_cast<Metric>(i);
  }
  return std::nullopt;
}

PipelineConfig parse_config(std::string_view toml_text) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config parse error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  reject_unknown(root,
                 {"stages", "seed", "workers", "error_budget", "keep_rejected", "geometry", "filter", "score", "defects",
                  "buckets", "eval"},
                 "config");

  PipelineConfig cfg;
  for (const auto& [key, node] : root) {
    const std::string_view k = key.str();
    if (k == "stages") {
      const auto* arr = node.as_array();
      if (arr == nullptr) throw ConfigError("'stages' must be an array of stage names");
      cfg.stages.clear();
      for (const auto& item : *arr) {
        const std::string name = read_string(item, "stages");
        auto stage = stage_from_string(name);
        if (!stage) throw ConfigError("unknown stage '" + name + "'");
        cfg.stages.push_back(*stage);
      }
    } else if (k == "seed") {
      cfg.seed = read_unsigned(node, "seed");
    } else if (k == "workers") {
      cfg.workers = static_cast<std::size_t>(read_unsigned(node, "workers"));
    } else if (k == "error_budget") {
      cfg.error_budget = static_cast<std::size_t>(read_unsigned(node, "error_budget"));
    } else if (k == "keep_rejected") {
      cfg.keep_rejected = read_bool(node, "keep_rejected");
    } else if (k == "geometry") {
      read_geometry(as_table(node, k), cfg.geometry);
    } else if (k == "filter") {
      read_filter(as_table(node, k), cfg.filter);
    } else if (k == "score") {
      read_score(as_table(node, k), cfg.score);
    } else if (k == "defects") {
      read_defects(as_table(node, k), cfg.defects);
    } else if (k == "eval") {
      read_eval(as_table(node, k), cfg.eval);
    } else if (k == "buckets") {
      const auto* arr = node.as_array();
      if (arr == nullptr) throw ConfigError("'buckets' must be an array of tables ([[buckets]])");
      for (const auto& item : *arr) cfg.buckets.push_back(read_bucket(as_table(item, "buckets")));
    }
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  PipelineConfig cfg = parse_config(text.str());
  // Sidecar paths are relative to the config file.
  const auto base = path.parent_path();
  for (std::string* p : {&cfg.score.aesthetic_sidecar, &cfg.score.detector_sidecar}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
  return cfg;
}

void apply_env_overrides(PipelineConfig& cfg) {
  if (const char* v = std::getenv("CURATE_AESTHETIC_ENDPOINT"); v != nullptr && *v != '\0') {
    cfg.score.aesthetic_endpoint = v;
  }
  if (const char* v = std::getenv("CURATE_VQA_ENDPOINT"); v != nullptr && *v != '\0') cfg.eval.client = v;
}

std::vector<std::string> validate_config(const PipelineConfig& cfg) {
  std::vector<std::string> out;
  auto add = [&](const std::vector<std::string>& v) { out.insert(out.end(), v.begin(), v.end()); };
  add(cfg.geometry.violations());
  add(cfg.filter.violations());
  add(cfg.defects.violations());
  if (cfg.workers < 1) out.push_back("workers must be >= 1");

  std::set<StageKind> seen;
  int last_rank = -1;
  for (StageKind s : cfg.stages) {
    if (!seen.insert(s).second) out.push_back("stage '" + std::string(to_string(s)) + "' listed twice");
    // prefilter < score < filter < caption stages; caption stages in any order.
    const int rank = std::min(static_cast<int>(s), static_cast<int>(StageKind::caption_validate));
    if (rank < last_rank) out.push_back("stage '" + std::string(to_string(s)) + "' is out of pipeline order");
    last_rank = std::max(last_rank, rank);
  }
  const auto shuffle_at = std::find(cfg.stages.begin(), cfg.stages.end(), StageKind::caption_shuffle);
  const auto canon_at = std::find(cfg.stages.begin(), cfg.stages.end(), StageKind::caption_canonicalize);
  if (shuffle_at != cfg.stages.end() && canon_at != cfg.stages.end() && canon_at < shuffle_at) {
    out.push_back("caption_canonicalize must come after caption_shuffle");
  }

  namespace fs = std::filesystem;
  if (!cfg.score.aesthetic_sidecar.empty() && !fs::exists(cfg.score.aesthetic_sidecar)) {
    out.push_back("score.aesthetic_sidecar '" + cfg.score.aesthetic_sidecar + "' does not exist");
  }
  if (!cfg.score.detector_sidecar.empty() && !fs::exists(cfg.score.detector_sidecar)) {
    out.push_back("score.detector_sidecar '" + cfg.score.detector_sidecar + "' does not exist");
  }
  if (cfg.score.ocr && cfg.score.detector_sidecar.empty()) out.push_back("score.ocr requires score.detector_sidecar");
  if (!cfg.score.aesthetic_endpoint.empty()) {
    try {
      parse_endpoint(cfg.score.aesthetic_endpoint);
    } catch (const ConfigError& e) {
      out.push_back(std::string("score.aesthetic_endpoint: ") + e.what());
    }
  }
  if (!cfg.score.aesthetic_endpoint.empty() && !cfg.score.aesthetic_sidecar.empty()) {
    out.push_back("score: give either aesthetic_sidecar or aesthetic_endpoint, not both");
  }

  for (const BucketJob& job : cfg.buckets) {
    const std::string name = "buckets[" + std::string(to_string(job.metric)) + "]";
    if (job.k < 1) out.push_back(name + ".k must be >= 1");
    if (job.range && !(job.range->first < job.range->second)) out.push_back(name + ".range requires low < high");
    if (!job.stage.empty()) {
      auto stage = stage_from_string(job.stage);
      if (!stage || std::find(cfg.stages.begin(), cfg.stages.end(), *stage) == cfg.stages.end()) {
        out.push_back(name + ".stage '" + job.stage + "' is not part of the pipeline");
      }
    }
  }

  if (!cfg.eval.client.empty()) {
    try {
      make_vqa_client(cfg.eval.client);
    } catch (const ConfigError& e) {
      out.push_back(std::string("eval.client: ") + e.what());
    }
    if (cfg.eval.concurrency < 1) out.push_back("eval.concurrency must be >= 1");
  }
  return out;
}

}  // namespace curate
