#pragma once

// Four-slot structured captions: subject, setting, aesthetics, camera.
//
// A caption is rendered as "m1 slot1 m2 slot2 m3 slot3 m4 slot4" where the
// markers m_i are either "1." .. "4." (numeric) or "~1~" .. "~4~" (tilde).
// Slots are located by their markers only, so a slot may hold several
// sentences and inline numerals such as "3.14".

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "curate/errors.hpp"

namespace curate {

inline constexpr std::size_t kSlotCount = 4;

enum class MarkerStyle { numeric, tilde };

std::string_view to_string(MarkerStyle style) noexcept;
// "1." or "~1~" for label 1..4.
std::string marker_text(MarkerStyle style, int label);

struct StructuredCaption {
  std::array<std::string, kSlotCount> slots;

  const std::string& subject() const noexcept { return slots[0]; }
  const std::string& setting() const noexcept { return slots[1]; }
  const std::string& aesthetics() const noexcept { return slots[2]; }
  const std::string& camera() const noexcept { return slots[3]; }

  bool operator==(const StructuredCaption&) const = default;
};

// Empty when the caption can be rendered and parsed back verbatim; otherwise
// one human-readable problem per offending slot.
std::vector<std::string> caption_violations(const StructuredCaption& caption);

// A bijection on {1,2,3,4}. Position i holds the source slot rendered at i.
class Permutation4 {
 public:
  Permutation4() noexcept : mapping_{1, 2, 3, 4} {}
  // Throws DomainError unless `mapping` is a bijection on {1,2,3,4}.
  explicit Permutation4(std::array<int, kSlotCount> mapping);

  static Permutation4 identity() noexcept { return {}; }
  static bool is_bijection(const std::array<int, kSlotCount>& mapping) noexcept;

  // Lexicographic rank in [0, 24).
  static Permutation4 from_rank(int rank);
  int rank() const noexcept;
  // All 24 elements in rank order.
  static const std::array<Permutation4, 24>& all();

  int operator[](std::size_t position) const noexcept { return mapping_[position]; }
  const std::array<int, kSlotCount>& mapping() const noexcept { return mapping_; }

  Permutation4 inverse() const noexcept;
  // (a.then(b)) applies a first, then b.
  Permutation4 then(const Permutation4& next) const noexcept;

  bool operator==(const Permutation4&) const = default;

 private:
  std::array<int, kSlotCount> mapping_;
};

enum class IssueKind {
  missing_marker,
  out_of_order,
  duplicate_marker,
  empty_slot,
  trailing_garbage,
  repetition_loop,
  overlength,
};

struct CaptionIssue {
  IssueKind kind;
  int slot = 0;  // 1..4 for the per-marker kinds, 0 otherwise

  std::string to_string() const;
  bool operator==(const CaptionIssue&) const = default;
};

struct ValidationReport {
  std::vector<CaptionIssue> issues;

  bool well_formed() const noexcept { return issues.empty(); }
  bool has(IssueKind kind) const noexcept;
  std::string to_string() const;
};

class CaptionError : public DomainError {
 public:
  explicit CaptionError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

struct ParsedCaption {
  StructuredCaption caption;
  MarkerStyle style = MarkerStyle::numeric;
};

struct ParseResult {
  std::optional<ParsedCaption> parsed;
  ValidationReport report;

  explicit operator bool() const noexcept { return parsed.has_value(); }
};

ParseResult parse_caption(std::string_view text);

// Throws DomainError if the caption has caption_violations().
std::string render(const StructuredCaption& caption, MarkerStyle style);

// Slot-level action: out.slots[i] = caption.slots[g[i] - 1].
StructuredCaption permute_slots(const StructuredCaption& caption, const Permutation4& g);

struct ShuffledCaption {
  std::string text;
  Permutation4 permutation;
};

// Content moves, markers stay numbered 1..4 in the output.
ShuffledCaption shuffle(const StructuredCaption& caption, const Permutation4& g, MarkerStyle style);

// Inverse of shuffle given the permutation recorded at shuffle time.
// Throws CaptionError if the text does not parse.
StructuredCaption canonicalize(std::string_view shuffled_text, const Permutation4& g);

// Deterministic in (seed, id); uniform over the 24 permutations across ids.
Permutation4 random_permutation(std::uint64_t seed, std::string_view record_id);

// Line breaks become plain whitespace and the four slot markers become
// "~1~".."~4~". Works on the parse tree, so numerals inside slot text are
// never touched. Idempotent. Throws CaptionError on unparseable input.
std::string rewrite_markers(std::string_view text);

struct DefectThresholds {
  double repeat_ratio = 0.5;       // flag when repeated 4-grams exceed this share
  int sentence_repeats = 3;        // flag when one sentence occurs this often
  std::size_t max_chars = 2000;

  std::vector<std::string> violations() const;
};

// Share of word 4-grams that repeat an earlier 4-gram, in [0, 1).
double repeated_ngram_ratio(std::string_view text, std::size_t n = 4);
// Highest verbatim occurrence count of any sentence (case-insensitive).
int max_sentence_repeats(std::string_view text);

ValidationReport detect_defect(std::string_view text, const DefectThresholds& thresholds = {});

}  // namespace curate
