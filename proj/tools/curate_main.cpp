// curate: command-line front end for the curation pipeline.
//
// Stage subcommands stream one manifest to another ("-" is stdin/stdout).
// Exit codes: 0 ok, 1 config error, 2 data error, 3 client failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "curate/analytics.hpp"
#include "curate/caption.hpp"
#include "curate/errors.hpp"
#include "curate/manifest.hpp"
#include "curate/pipeline.hpp"
#include "curate/vqa.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace curate;

namespace {

struct StreamOpts {
  std::string in = "-";
  std::string out = "-";
};

void add_stream_opts(CLI::App* cmd, StreamOpts& s) {
  cmd->add_option("--in", s.in, "input manifest (- for stdin)");
  cmd->add_option("--out", s.out, "output manifest (- for stdout)");
}

void add_common_opts(CLI::App* cmd, PipelineConfig& cfg) {
  cmd->add_option("--workers", cfg.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--error-budget", cfg.error_budget, "malformed records tolerated before aborting");
  cmd->add_flag("--keep-rejected", cfg.keep_rejected, "write rejected/defective records through");
}

void require_valid(const PipelineConfig& cfg) {
  auto v = validate_config(cfg);
  if (v.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& s : v) msg += "\n  - " + s;
  throw ConfigError(msg);
}

// Writes through a temporary file so a failed stage never leaves a partial
// manifest under the final name.
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    try {
      fn(out);
    } catch (...) {
      out.close();
      std::remove(tmp.c_str());
      throw;
    }
    out.flush();
    if (!out) throw IoError("write failed for " + tmp);
  }
  fs::rename(tmp, path);
}

template <class Fn>
void with_input(const std::string& path, Fn&& fn) {
  if (path == "-") {
    fn(std::cin);
    return;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  fn(in);
}

void write_file(const std::string& path, const std::string& text) {
  with_output(path, [&](std::ostream& out) { out << text; });
}

int run_single_stage(StageKind kind, const PipelineConfig& cfg, const StreamOpts& s) {
  require_valid(cfg);
  auto resources = StageResources::load(cfg);
  StageStats stats;
  with_input(s.in, [&](std::istream& in) {
    with_output(s.out, [&](std::ostream& out) { stats = run_stage(kind, cfg, *resources, in, out); });
  });
  std::cerr << stats.stage << ": " << stats.input << " in, " << stats.output << " kept";
  if (stats.written != stats.output) std::cerr << ", " << stats.written << " written";
  std::cerr << "\n";
  for (const auto& e : stats.errors) std::cerr << "  skipped " << e << "\n";
  return 0;
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("--range expects LOW:HIGH, got '" + text + "'");
  try {
    std::size_t used = 0;
    const double lo = std::stod(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("trailing");
    const std::string hi_text = text.substr(colon + 1);
    const double hi = std::stod(hi_text, &used);
    if (used != hi_text.size()) throw std::invalid_argument("trailing");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ConfigError("--range expects LOW:HIGH, got '" + text + "'");
  }
}

std::set<std::string> read_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword list " + path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (auto& w : tokenize_words(line)) words.insert(std::move(w));
  }
  return words;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dataset curation pipeline: filtering, caption grammar, logbook analytics, VQA evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "curate 0.1.0");

  PipelineConfig cfg;
  StreamOpts streams;
  std::function<int()> action;

  // prefilter
  auto* prefilter = app.add_subcommand("prefilter", "size and aspect-ratio gate");
  add_stream_opts(prefilter, streams);
  add_common_opts(prefilter, cfg);
  prefilter->add_option("--min-side", cfg.geometry.min_side, "minimum side length in pixels");
  prefilter->add_option("--aspect", cfg.geometry.aspect_threshold, "minimum min(w/h, h/w)");
  prefilter->add_option("--crop", cfg.geometry.crop_target, "center-crop side used by later scoring");
  prefilter->callback([&] { action = [&] { return run_single_stage(StageKind::prefilter, cfg, streams); }; });

  // score
  auto* score = app.add_subcommand("score", "attach aesthetic / luminance / OCR scores");
  add_stream_opts(score, streams);
  add_common_opts(score, cfg);
  score->add_flag("--luminance", cfg.score.luminance, "decode the PPM at each uri");
  score->add_flag("--ocr", cfg.score.ocr, "score text coverage from --detector-sidecar");
  score->add_option("--aesthetic-sidecar", cfg.score.aesthetic_sidecar, "JSONL of {id, aesthetic}");
  score->add_option("--aesthetic-endpoint", cfg.score.aesthetic_endpoint, "http://host:port/path");
  score->add_option("--detector-sidecar", cfg.score.detector_sidecar, "JSONL of {id, polygons}");
  score->add_option("--crop", cfg.geometry.crop_target, "center-crop side for luminance");
  score->add_option("--detector-side", cfg.filter.detector_side, "detector frame side");
  score->add_option("--confidence-min", cfg.filter.confidence_min, "polygon confidence cut");
  score->callback([&] {
    action = [&] {
      apply_env_overrides(cfg);
      return run_single_stage(StageKind::score, cfg, streams);
    };
  });

  // filter
  std::string filter_config;
  auto* filter = app.add_subcommand("filter", "apply the keep/reject predicate");
  add_stream_opts(filter, streams);
  filter->add_option("--config", filter_config, "TOML with a [filter] table")->check(CLI::ExistingFile);
  std::size_t filter_workers = 0;
  filter->add_option("--workers", filter_workers, "worker threads")->check(CLI::PositiveNumber);
  filter->add_flag("--keep-rejected", cfg.keep_rejected, "write rejected records through");
  filter->callback([&] {
    action = [&] {
      const bool keep = cfg.keep_rejected;
      if (!filter_config.empty()) cfg = load_config(filter_config);
      cfg.keep_rejected = cfg.keep_rejected || keep;
      if (filter_workers > 0) cfg.workers = filter_workers;
      return run_single_stage(StageKind::filter, cfg, streams);
    };
  });

  // buckets
  std::string metric_name = "aesthetic";
  std::string range_text;
  std::string text_out;
  BucketJob job;
  auto* buckets = app.add_subcommand("buckets", "equal-width histogram with per-bucket mean/std");
  buckets->add_option("--in", streams.in, "scored manifest")->required();
  buckets->add_option("--out", streams.out, "JSON report (- for stdout)");
  buckets->add_option("--metric", metric_name, "aesthetic | luminance | ocr");
  buckets->add_option("--k", job.k, "bucket count")->check(CLI::PositiveNumber);
  buckets->add_option("--range", range_text, "LOW:HIGH (default: data min/max)");
  buckets->add_option("--text", text_out, "also write the aligned table here (- for stdout)");
  buckets->add_flag("--sample-std", job.sample_std, "n-1 denominator");
  buckets->add_option("--workers", cfg.workers, "accumulator shards")->check(CLI::PositiveNumber);
  buckets->add_option("--error-budget", cfg.error_budget, "malformed records tolerated");
  buckets->callback([&] {
    action = [&] {
      const auto metric = metric_from_string(metric_name);
      if (!metric) throw ConfigError("unknown metric '" + metric_name + "'");
      job.metric = *metric;
      if (!range_text.empty()) {
        job.range = parse_range(range_text);
        BucketSpec spec{job.k, job.range->first, job.range->second};
        if (auto v = spec.violations(); !v.empty()) throw ConfigError("bucket range: " + v.front());
      }
      const BucketReport report = bucket_metric(streams.in, job, cfg.workers, cfg.error_budget);
      write_file(streams.out, report.to_json());
      if (!text_out.empty()) write_file(text_out, report.to_text());
      return 0;
    };
  });

  // stats words
  auto* stats = app.add_subcommand("stats", "caption statistics");
  stats->require_subcommand(1);
  std::string stopword_file;
  std::size_t top_n = 20;
  bool keep_numeric = false;
  auto* words = stats->add_subcommand("words", "word frequencies over caption text");
  words->add_option("--in", streams.in, "manifest or pairs file (- for stdin)");
  words->add_option("--out", streams.out, "JSON output (- for stdout)");
  words->add_option("--stopwords", stopword_file, "one word per line; replaces the built-in list");
  words->add_option("--top", top_n, "how many words to list");
  words->add_flag("--keep-numeric", keep_numeric, "count purely numeric tokens too");
  words->callback([&] {
    action = [&] {
      WordFrequency freq(stopword_file.empty() ? default_stopwords() : read_stopwords(stopword_file), keep_numeric);
      std::uint64_t captions = 0;
      with_input(streams.in, [&](std::istream& in) {
        ManifestReader reader(in, cfg.error_budget);
        while (auto r = reader.next()) {
          if (r->caption_raw) {
            freq.add(*r->caption_raw);
          } else if (r->caption_structured) {
            for (const auto& slot : r->caption_structured->slots) freq.add(slot);
          } else {
            continue;
          }
          ++captions;
        }
      });
      nlohmann::ordered_json j;
      j["captions"] = captions;
      j["distinct"] = freq.counts().size();
      auto rows = nlohmann::ordered_json::array();
      for (const auto& [word, count] : freq.top(top_n)) rows.push_back({{"word", word}, {"count", count}});
      j["top"] = std::move(rows);
      write_file(streams.out, j.dump(2) + "\n");
      return 0;
    };
  });

  // caption ops
  auto* caption = app.add_subcommand("caption", "structured-caption operations");
  caption->require_subcommand(1);
  struct CaptionOp {
    const char* name;
    const char* help;
    StageKind kind;
  };
  const CaptionOp ops[] = {
      {"validate", "parse captions and flag defects", StageKind::caption_validate},
      {"shuffle", "permute slot content by a seeded per-record permutation", StageKind::caption_shuffle},
      {"canonicalize", "undo a recorded shuffle", StageKind::caption_canonicalize},
      {"rewrite", "tokenizer-safe ~n~ markers, no line breaks", StageKind::caption_rewrite},
  };
  for (const auto& op : ops) {
    auto* sub = caption->add_subcommand(op.name, op.help);
    add_stream_opts(sub, streams);
    add_common_opts(sub, cfg);
    if (op.kind == StageKind::caption_shuffle) sub->add_option("--seed", cfg.seed, "global seed");
    if (op.kind == StageKind::caption_validate) {
      sub->add_option("--repeat-ratio", cfg.defects.repeat_ratio, "repeated 4-gram share that flags a loop");
      sub->add_option("--sentence-repeats", cfg.defects.sentence_repeats, "verbatim sentence count that flags a loop");
      sub->add_option("--max-chars", cfg.defects.max_chars, "overlength cut");
    }
    const StageKind kind = op.kind;
    sub->callback([&, kind] { action = [&, kind] { return run_single_stage(kind, cfg, streams); }; });
  }

  // eval vqa
  auto* eval = app.add_subcommand("eval", "evaluation harnesses");
  eval->require_subcommand(1);
  std::string pairs_file;
  std::string client_spec;
  auto* vqa = eval->add_subcommand("vqa", "yes/no alignment score over image-caption pairs");
  vqa->add_option("--client", client_spec, "http://host:port/path or stub:<p>");
  vqa->add_option("--pairs", pairs_file, "JSONL of {id, uri, caption}")->required();
  vqa->add_option("--out", streams.out, "JSON report (- for stdout)");
  vqa->add_option("--model", cfg.eval.model, "label stored in the report");
  vqa->add_option("--concurrency", cfg.eval.concurrency, "requests in flight")->check(CLI::PositiveNumber);
  vqa->add_flag("--exclude-gaps", cfg.eval.exclude_gaps, "report failed pairs as gaps instead of failing");
  vqa->callback([&] {
    action = [&] {
      cfg.eval.client = client_spec;
      apply_env_overrides(cfg);
      if (cfg.eval.client.empty()) throw ConfigError("eval vqa needs --client or CURATE_VQA_ENDPOINT");
      std::vector<VqaPair> pairs;
      with_input(pairs_file, [&](std::istream& in) { pairs = read_pairs(in); });
      if (pairs.empty()) throw DataError("no pairs in " + pairs_file);
      auto client = make_vqa_client(cfg.eval.client);
      ScoreOptions opts;
      opts.model = cfg.eval.model;
      opts.concurrency = cfg.eval.concurrency;
      opts.exclude_gaps = cfg.eval.exclude_gaps;
      try {
        const AlignmentReport report = score_pairs(*client, pairs, opts);
        write_file(streams.out, report.to_json());
        std::cerr << report.model << ": mean p_yes " << report.mean << " over " << report.rows.size() - report.gaps
                  << " pairs (" << report.gaps << " gaps)\n";
      } catch (const IncompleteReportError& e) {
        if (streams.out != "-") write_file(streams.out + ".partial", e.report().to_json());
        throw;
      }
      return 0;
    };
  });

  // run
  std::string run_config;
  std::string run_in;
  std::string out_dir;
  bool resume = false;
  std::size_t run_workers = 0;
  auto* run = app.add_subcommand("run", "full pipeline with logbook and checkpoints");
  run->add_option("--config", run_config, "pipeline TOML")->required()->check(CLI::ExistingFile);
  run->add_option("--in", run_in, "input manifest")->required();
  run->add_option("--out-dir", out_dir, "stage manifests, reports, logbook")->required();
  run->add_flag("--resume", resume, "reuse stages recorded in checkpoint.json");
  run->add_option("--workers", run_workers, "override the configured worker count")->check(CLI::PositiveNumber);
  run->callback([&] {
    action = [&] {
      PipelineConfig loaded = load_config(run_config);
      apply_env_overrides(loaded);
      if (run_workers > 0) loaded.workers = run_workers;
      try {
        const PipelineResult result = run_pipeline(loaded, run_in, out_dir, RunOptions{resume});
        for (const auto& s : result.skipped) std::cerr << "reused " << s << " from checkpoint\n";
        std::cout << result.logbook.to_text();
        if (result.alignment) std::cout << "vqa mean p_yes: " << result.alignment->mean << "\n";
      } catch (const StageFailure& f) {
        std::cerr << "curate: " << f.what() << "\n"
                  << "curate: rerun with --resume to continue after '"
                  << (f.last_completed().empty() ? std::string("<start>") : f.last_completed()) << "'\n";
        return f.exit_code();
      }
      return 0;
    };
  });

  // logbook show
  auto* logbook = app.add_subcommand("logbook", "stage funnel");
  logbook->require_subcommand(1);
  std::string logbook_path;
  auto* show = logbook->add_subcommand("show", "print a logbook.json as a table");
  show->add_option("path", logbook_path, "logbook.json or a run directory")->required();
  show->callback([&] {
    action = [&] {
      fs::path p = logbook_path;
      if (fs::is_directory(p)) p /= "logbook.json";
      std::ifstream in(p);
      if (!in) throw IoError("cannot open " + p.string());
      std::stringstream buf;
      buf << in.rdbuf();
      std::cout << StageLogbook::from_json(buf.str()).to_text();
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    return action ? action() : 0;
  } catch (const std::exception& e) {
    std::cerr << "curate: error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
