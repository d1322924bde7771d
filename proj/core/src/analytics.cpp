#include "curate/analytics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "curate/errors.hpp"
#include "json.hpp"

namespace curate {

using ordered_json = nlohmann::ordered_json;

double BucketSpec::edge(int j) const noexcept {
  if (j <= 0) return low;
  if (j >= k) return high;
  return low + (high - low) * static_cast<double>(j) / static_cast<double>(k);
}

std::vector<std::string> BucketSpec::violations() const {
  std::vector<std::string> out;
  if (k < 1) out.push_back("bucket k must be >= 1");
  if (!std::isfinite(low) || !std::isfinite(high)) out.push_back("bucket range must be finite");
  else if (!(low < high)) out.push_back("bucket range requires low < high");
  return out;
}

int assign_bucket(double value, const BucketSpec& spec) {
  if (auto v = spec.violations(); !v.empty()) throw DomainError(v.front());
  if (std::isnan(value) || value < spec.low || value > spec.high) {
    std::ostringstream msg;
    msg << "value " << value << " outside bucket range [" << spec.low << ", " << spec.high << "]";
    throw DomainError(msg.str());
  }
  const double scaled = static_cast<double>(spec.k) * (value - spec.low) / (spec.high - spec.low);
  int idx = static_cast<int>(std::floor(scaled));
  idx = std::clamp(idx, 0, spec.k - 1);
  // The printed edges are authoritative; repair the division's rounding.
  while (idx > 0 && value < spec.edge(idx)) --idx;
  while (idx < spec.k - 1 && value >= spec.edge(idx + 1)) ++idx;
  return idx + 1;
}

BucketAccumulator::BucketAccumulator(BucketSpec spec, RangePolicy policy)
    : spec_(spec), policy_(policy) {
  if (auto v = spec_.violations(); !v.empty()) throw DomainError(v.front());
  cells_.resize(static_cast<std::size_t>(spec_.k));
}

void BucketAccumulator::add(double value) {
  if (!std::isfinite(value)) throw DomainError("bucket value must be finite");
  if (value < spec_.low || value > spec_.high) {
    if (policy_ == RangePolicy::reject) assign_bucket(value, spec_);  // throws
    ++out_of_range_;
    return;
  }
  BucketCell& cell = cells_[static_cast<std::size_t>(assign_bucket(value, spec_) - 1)];
  ++cell.count;
  cell.sum.add(value);
  cell.sum_sq.add_square(value);
}

void BucketAccumulator::merge(const BucketAccumulator& other) {
  if (other.spec_.k != spec_.k || other.spec_.low != spec_.low || other.spec_.high != spec_.high) {
    throw DomainError("cannot merge accumulators with different bucket specs");
  }
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    cells_[i].count += other.cells_[i].count;
    cells_[i].sum.merge(other.cells_[i].sum);
    cells_[i].sum_sq.merge(other.cells_[i].sum_sq);
  }
  out_of_range_ += other.out_of_range_;
}

BucketReport BucketAccumulator::report(std::string metric, bool sample_std) const {
  BucketReport rep;
  rep.metric = std::move(metric);
  rep.spec = spec_;
  rep.sample_std = sample_std;
  rep.out_of_range = out_of_range_;
  for (int b = 1; b <= spec_.k; ++b) {
    const BucketCell& c = cell(b);
    BucketRow row;
    row.bucket = b;
    row.edge_low = spec_.edge(b - 1);
    row.edge_high = spec_.edge(b);
    row.count = c.count;
    if (c.count > 0) {
      const double n = static_cast<double>(c.count);
      // The exact mean lies inside the bucket; clamp away final rounding.
      row.mean = std::clamp(c.sum.value() / n, row.edge_low, row.edge_high);
      // n*S2 - S1^2 evaluated exactly, rounded once.
      ExactSum m2n = c.sum_sq.times(n);
      ExactSum s1sq = c.sum.times(c.sum);
      s1sq.negate();
      m2n.merge(s1sq);
      const double scaled_m2 = std::max(0.0, m2n.value());
      if (!sample_std) {
        row.stddev = std::sqrt(scaled_m2 / (n * n));
      } else if (c.count > 1) {
        row.stddev = std::sqrt(scaled_m2 / (n * (n - 1.0)));
      }
    }
    rep.rows.push_back(row);
  }
  return rep;
}

std::uint64_t BucketReport::total() const noexcept {
  std::uint64_t t = 0;
  for (const auto& r : rows) t += r.count;
  return t;
}

std::string BucketReport::to_json() const {
  ordered_json j;
  j["metric"] = metric;
  j["k"] = spec.k;
  j["low"] = spec.low;
  j["high"] = spec.high;
  j["std"] = sample_std ? "sample" : "population";
  j["out_of_range"] = out_of_range;
  j["total"] = total();
  ordered_json rows_json = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row;
    row["bucket"] = r.bucket;
    row["edge_low"] = r.edge_low;
    row["edge_high"] = r.edge_high;
    row["count"] = r.count;
    if (r.mean) row["mean"] = *r.mean;
    if (r.stddev) row["std"] = *r.stddev;
    rows_json.push_back(std::move(row));
  }
  j["buckets"] = std::move(rows_json);
  return j.dump(2) + "\n";
}

namespace {

std::string with_thousands(std::uint64_t v) {
  std::string out = std::to_string(v);
  for (int i = static_cast<int>(out.size()) - 3; i > 0; i -= 3) out.insert(static_cast<std::size_t>(i), ",");
  return out;
}

std::string fixed(double v, int precision) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

}  // namespace

std::string BucketReport::to_text() const {
  std::ostringstream out;
  out << (metric.empty() ? "values" : metric) << ": " << spec.k << " equal-width buckets over ["
      << spec.low << ", " << spec.high << "], " << (sample_std ? "sample" : "population") << " std\n";
  out << std::left << std::setw(8) << "Bucket" << std::setw(26) << "Edges" << std::setw(12) << "Mean"
      << std::setw(20) << "Standard Deviation" << "Count\n";
  for (const auto& r : rows) {
    const bool last = r.bucket == spec.k;
    const std::string edges = "[" + fixed(r.edge_low, 4) + ", " + fixed(r.edge_high, 4) + (last ? "]" : ")");
    out << std::left << std::setw(8) << r.bucket << std::setw(26) << edges << std::setw(12)
        << (r.mean ? fixed(*r.mean, 4) : "-") << std::setw(20) << (r.stddev ? fixed(*r.stddev, 4) : "-")
        << with_thousands(r.count) << "\n";
  }
  if (out_of_range > 0) out << "out of range: " << with_thousands(out_of_range) << "\n";
  return out.str();
}

BucketReport bucket_stats(std::span<const double> values, const BucketSpec& spec,
                          const BucketStatsOptions& options) {
  BucketAccumulator acc(spec, options.range_policy);
  for (double v : values) acc.add(v);
  return acc.report(options.metric, options.sample_std);
}

std::optional<std::pair<double, double>> value_range(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return std::pair{*lo, *lo + 1.0};
  return std::pair{*lo, *hi};
}

void StageLogbook::append(std::string stage, std::uint64_t input, std::uint64_t output) {
  if (output > input) {
    throw DomainError("stage '" + stage + "' emitted " + std::to_string(output) + " records from " +
                      std::to_string(input));
  }
  if (!entries_.empty() && entries_.back().output != input) {
    throw DomainError("stage '" + stage + "' input " + std::to_string(input) + " does not match previous output " +
                      std::to_string(entries_.back().output));
  }
  entries_.push_back({std::move(stage), input, output});
}

std::string StageLogbook::to_json() const {
  ordered_json j;
  ordered_json rows = ordered_json::array();
  for (const auto& e : entries_) {
    rows.push_back(ordered_json{{"stage", e.stage}, {"input", e.input}, {"output", e.output}});
  }
  j["stages"] = std::move(rows);
  return j.dump(2) + "\n";
}

StageLogbook StageLogbook::from_json(std::string_view text) {
  StageLogbook log;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& row : j.at("stages")) {
      log.append(row.at("stage").get<std::string>(), row.at("input").get<std::uint64_t>(),
                 row.at("output").get<std::uint64_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed logbook: ") + e.what());
  } catch (const DomainError& e) {
    throw DataError(std::string("inconsistent logbook: ") + e.what());
  }
  return log;
}

std::string StageLogbook::to_text() const {
  std::ostringstream out;
  out << std::left << std::setw(24) << "Stage" << std::right << std::setw(16) << "Input" << std::setw(16)
      << "Output" << std::setw(10) << "Kept\n";
  for (const auto& e : entries_) {
    const double kept = e.input == 0 ? 100.0 : 100.0 * static_cast<double>(e.output) / static_cast<double>(e.input);
    out << std::left << std::setw(24) << e.stage << std::right << std::setw(16) << with_thousands(e.input)
        << std::setw(16) << with_thousands(e.output) << std::setw(9) << fixed(kept, 2) << "%\n";
  }
  return out.str();
}

StageLogbook stage_log(StageLogbook log, std::string stage, std::uint64_t input, std::uint64_t output) {
  log.append(std::move(stage), input, output);
  return log;
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words{
      "a",       "about",  "above",   "after",   "again",  "against", "all",     "am",      "an",
      "and",     "any",    "are",     "as",      "at",     "be",      "because", "been",    "before",
      "being",   "below",  "between", "both",    "but",    "by",      "can",     "could",   "did",
      "do",      "does",   "doing",   "down",    "during", "each",    "few",     "for",     "from",
      "further", "had",    "has",     "have",    "having", "he",      "her",     "here",    "hers",
      "herself", "him",    "himself", "his",     "how",    "i",       "if",      "in",      "into",
      "is",      "it",     "its",     "itself",  "just",   "me",      "more",    "most",    "my",
      "myself",  "no",     "nor",     "not",     "now",    "of",      "off",     "on",      "once",
      "only",    "or",     "other",   "our",     "ours",   "ourselves", "out",   "over",    "own",
      "s",       "same",   "she",     "should",  "so",     "some",    "such",    "t",       "than",
      "that",    "the",    "their",   "theirs",  "them",   "themselves", "then", "there",   "these",
      "they",    "this",   "those",   "through", "to",     "too",     "under",   "until",   "up",
      "very",    "was",    "we",      "were",    "what",   "when",    "where",   "which",   "while",
      "who",     "whom",   "why",     "will",    "with",   "would",   "you",     "your",    "yours",
      "yourself", "yourselves",
  };
  return words;
}

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u) || u >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

WordFrequency::WordFrequency(std::set<std::string> stopwords, bool keep_numeric)
    : stopwords_(std::move(stopwords)), keep_numeric_(keep_numeric) {}

void WordFrequency::add(std::string_view caption) {
  for (auto& tok : tokenize_words(caption)) {
    if (stopwords_.contains(tok)) continue;
    if (!keep_numeric_ && std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      continue;
    }
    ++counts_[std::move(tok)];
  }
}

std::vector<std::pair<std::string, std::uint64_t>> WordFrequency::top(std::size_t n) const {
  std::vector<std::pair<std::string, std::uint64_t>> all(counts_.begin(), counts_.end());
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (all.size() > n) all.resize(n);
  return all;
}

WordFrequency word_frequency(std::span<const std::string> captions, const std::set<std::string>& stopwords) {
  WordFrequency wf(stopwords);
  for (const auto& c : captions) wf.add(c);
  return wf;
}

}  // namespace curate
