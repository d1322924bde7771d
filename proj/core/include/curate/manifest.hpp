#pragma once

// Record model and line-delimited JSON manifests.
//
// One object per line. Field names are fixed: id, uri, width, height,
// caption_raw, caption_slots{subject,setting,aesthetics,camera},
// permutation[4], scores{aesthetic,luminance,ocr}, status, reasons[].
// Absent optionals are omitted rather than written as null.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "curate/caption.hpp"
#include "curate/errors.hpp"

namespace curate {

enum class FilterStatus { pending, accepted, rejected, defective };

enum class Reason {
  min_size,
  aspect_ratio,
  aesthetic,
  luminance_low,
  luminance_high,
  ocr_intermediate,
  caption_malformed,
  caption_repetition,
  caption_overlength,
};

std::string_view to_string(FilterStatus status) noexcept;
std::string_view to_string(Reason reason) noexcept;
std::optional<FilterStatus> status_from_string(std::string_view text) noexcept;
std::optional<Reason> reason_from_string(std::string_view text) noexcept;

struct FilterOutcome {
  FilterStatus status = FilterStatus::pending;
  std::vector<Reason> reasons;

  static FilterOutcome accepted() { return {FilterStatus::accepted, {}}; }
  static FilterOutcome rejected(std::vector<Reason> why) { return {FilterStatus::rejected, std::move(why)}; }
  static FilterOutcome defective(std::vector<Reason> why) { return {FilterStatus::defective, std::move(why)}; }

  bool is_accepted() const noexcept { return status == FilterStatus::accepted; }
  // Still in the funnel: not rejected, not defective.
  bool live() const noexcept {
    return status == FilterStatus::pending || status == FilterStatus::accepted;
  }

  bool operator==(const FilterOutcome&) const = default;
};

struct ScoreSet {
  std::optional<double> aesthetic;
  std::optional<double> luminance;  // [0, 255]
  std::optional<double> ocr;        // >= 0, not clamped to 1

  bool complete() const noexcept { return aesthetic && luminance && ocr; }
  bool operator==(const ScoreSet&) const = default;
};

struct ManifestRecord {
  std::string id;
  std::string uri;
  std::optional<std::uint32_t> width;
  std::optional<std::uint32_t> height;
  std::optional<std::string> caption_raw;
  std::optional<StructuredCaption> caption_structured;
  std::optional<Permutation4> permutation;
  ScoreSet scores;
  FilterOutcome outcome;

  bool operator==(const ManifestRecord&) const = default;
};

// Invariant checks shared by the reader and the writer. Empty means valid.
std::vector<std::string> record_violations(const ManifestRecord& record);

// Throws DataError on an invariant-violating record.
std::string serialize_record(const ManifestRecord& record);
// Throws DataError on malformed JSON, wrong field types or violated invariants.
ManifestRecord parse_record(std::string_view line);

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
  std::string fragment;  // leading bytes of the offending line
};

// Streaming reader. Malformed lines are collected with their line number;
// once more than `error_budget` lines fail, next() throws DataError.
// Blank lines are skipped.
class ManifestReader {
 public:
  explicit ManifestReader(std::istream& source, std::size_t error_budget = 0);

  std::optional<ManifestRecord> next();

  const std::vector<LineError>& errors() const noexcept { return errors_; }
  // Ids seen more than once so far, in order of first repetition.
  const std::vector<std::string>& duplicate_ids() const noexcept { return duplicates_; }
  std::size_t lines_read() const noexcept { return line_; }

 private:
  std::istream* source_;
  std::size_t budget_;
  std::size_t line_ = 0;
  std::string buffer_;
  std::vector<LineError> errors_;
  std::unordered_set<std::string> seen_;
  std::unordered_set<std::string> duplicate_set_;
  std::vector<std::string> duplicates_;
};

struct LoadedManifest {
  std::vector<ManifestRecord> records;
  std::vector<LineError> errors;
};

// Eager load. Throws DuplicateIdError listing every repeated id.
LoadedManifest load_manifest(std::istream& source, std::size_t error_budget = 0);

class ManifestWriter {
 public:
  explicit ManifestWriter(std::ostream& sink) : sink_(&sink) {}
  void write(const ManifestRecord& record);
  std::size_t count() const noexcept { return count_; }

 private:
  std::ostream* sink_;
  std::size_t count_ = 0;
};

std::size_t write_manifest(std::span<const ManifestRecord> records, std::ostream& sink);

}  // namespace curate
