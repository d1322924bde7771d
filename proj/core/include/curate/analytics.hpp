#pragma once

// Logbook analytics: equal-width bucket histograms with per-bucket
// count / mean / std, stage funnels, and caption word frequencies.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "curate/exact_sum.hpp"

namespace curate {

// k equal-width buckets over [low, high]; left-inclusive, the last bucket
// also takes `high`.
struct BucketSpec {
  int k = 10;
  double low = 0.0;
  double high = 1.0;

  // Edge j in 0..k. edge(0) == low and edge(k) == high exactly.
  double edge(int j) const noexcept;
  std::vector<std::string> violations() const;
};

// 1-based bucket index. Throws DomainError outside [low, high] or for NaN.
int assign_bucket(double value, const BucketSpec& spec);

struct BucketCell {
  std::uint64_t count = 0;
  ExactSum sum;
  ExactSum sum_sq;
};

enum class RangePolicy { reject, count_separately };

struct BucketRow {
  int bucket = 0;
  double edge_low = 0.0;
  double edge_high = 0.0;
  std::uint64_t count = 0;
  std::optional<double> mean;    // absent for empty buckets
  std::optional<double> stddev;  // absent for empty buckets (and n<2 when sample)
};

struct BucketReport {
  std::string metric;
  BucketSpec spec;
  bool sample_std = false;
  std::vector<BucketRow> rows;
  std::uint64_t out_of_range = 0;

  std::uint64_t total() const noexcept;
  std::string to_json() const;
  // Aligned "Bucket  Mean  Standard Deviation  Count" table plus edges.
  std::string to_text() const;
};

// Mergeable shard-local state. merge() is exact, so any split and merge
// order reproduces the single-pass (count, sum, sum_sq) triples.
class BucketAccumulator {
 public:
  explicit BucketAccumulator(BucketSpec spec, RangePolicy policy = RangePolicy::reject);

  void add(double value);
  // Throws DomainError when the specs differ.
  void merge(const BucketAccumulator& other);

  const BucketSpec& spec() const noexcept { return spec_; }
  const BucketCell& cell(int bucket) const { return cells_.at(static_cast<std::size_t>(bucket - 1)); }
  std::uint64_t out_of_range() const noexcept { return out_of_range_; }

  BucketReport report(std::string metric = {}, bool sample_std = false) const;

 private:
  BucketSpec spec_;
  RangePolicy policy_;
  std::vector<BucketCell> cells_;
  std::uint64_t out_of_range_ = 0;
};

struct BucketStatsOptions {
  RangePolicy range_policy = RangePolicy::reject;
  bool sample_std = false;
  std::string metric;
};

BucketReport bucket_stats(std::span<const double> values, const BucketSpec& spec,
                          const BucketStatsOptions& options = {});

// [min, max] of the values, for data-driven bucket ranges. A degenerate
// range (all values equal) is widened to [v, v + 1]. nullopt when empty.
std::optional<std::pair<double, double>> value_range(std::span<const double> values);

struct StageEntry {
  std::string stage;
  std::uint64_t input = 0;
  std::uint64_t output = 0;

  bool operator==(const StageEntry&) const = default;
};

// Linear funnel: each stage keeps at most what it received, and receives
// exactly what the previous stage kept.
class StageLogbook {
 public:
  // Throws DomainError when output > input or input breaks the chain.
  void append(std::string stage, std::uint64_t input, std::uint64_t output);

  const std::vector<StageEntry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  std::string to_json() const;
  static StageLogbook from_json(std::string_view text);
  std::string to_text() const;

  bool operator==(const StageLogbook&) const = default;

 private:
  std::vector<StageEntry> entries_;
};

StageLogbook stage_log(StageLogbook log, std::string stage, std::uint64_t input, std::uint64_t output);

const std::set<std::string>& default_stopwords();

// Lowercase alphanumeric tokens, stopwords excluded.
class WordFrequency {
 public:
  explicit WordFrequency(std::set<std::string> stopwords = default_stopwords(), bool keep_numeric = false);

  void add(std::string_view caption);

  const std::map<std::string, std::uint64_t>& counts() const noexcept { return counts_; }
  const std::set<std::string>& stopwords() const noexcept { return stopwords_; }
  // Highest counts first, ties broken alphabetically.
  std::vector<std::pair<std::string, std::uint64_t>> top(std::size_t n) const;

 private:
  std::set<std::string> stopwords_;
  bool keep_numeric_;
  std::map<std::string, std::uint64_t> counts_;
};

std::vector<std::string> tokenize_words(std::string_view text);

WordFrequency word_frequency(std::span<const std::string> captions,
                             const std::set<std::string>& stopwords = default_stopwords());

}  // namespace curate
