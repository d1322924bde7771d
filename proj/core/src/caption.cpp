#include "curate/caption.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace curate {
namespace {

bool is_space(char c) noexcept { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_line_break(char c) noexcept { return c == '\n' || c == '\r'; }

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

struct Marker {
  std::size_t pos = 0;
  std::size_t len = 0;
  int label = 0;  // 1..9
  MarkerStyle style = MarkerStyle::numeric;
};

// A marker is "d." or "~d~" standing alone between whitespace (or the ends
// of the text). "3.14" and "f/2." never qualify.
std::vector<Marker> find_markers(std::string_view text) {
  std::vector<Marker> out;
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !is_space(text[i - 1])) continue;
    const auto bounded_after = [&](std::size_t end) { return end == n || is_space(text[end]); };
    const char c = text[i];
    if (c >= '1' && c <= '9' && i + 1 < n && text[i + 1] == '.' && bounded_after(i + 2)) {
      out.push_back({i, 2, c - '0', MarkerStyle::numeric});
      ++i;
    } else if (c == '~' && i + 2 < n && text[i + 1] >= '1' && text[i + 1] <= '9' && text[i + 2] == '~' &&
               bounded_after(i + 3)) {
      out.push_back({i, 3, text[i + 1] - '0', MarkerStyle::tilde});
      i += 2;
    }
  }
  return out;
}

std::string normalize_slot(std::string_view raw) {
  std::string s(trim(raw));
  std::replace_if(s.begin(), s.end(), is_line_break, ' ');
  return s;
}

std::vector<std::string> lower_words(std::string_view text) {
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

}  // namespace

std::string_view to_string(MarkerStyle style) noexcept {
  return style == MarkerStyle::numeric ? "numeric" : "tilde";
}

std::string marker_text(MarkerStyle style, int label) {
  if (label < 1 || label > static_cast<int>(kSlotCount)) throw DomainError("marker label out of range");
  const char d = static_cast<char>('0' + label);
  return style == MarkerStyle::numeric ? std::string{d, '.'} : std::string{'~', d, '~'};
}

std::vector<std::string> caption_violations(const StructuredCaption& caption) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    const std::string& s = caption.slots[i];
    const std::string name = "slot " + std::to_string(i + 1);
    if (trim(s).empty()) {
      out.push_back(name + " is empty");
      continue;
    }
    if (trim(s).size() != s.size()) out.push_back(name + " has surrounding whitespace");
    if (std::any_of(s.begin(), s.end(), is_line_break)) out.push_back(name + " contains a line break");
    for (const Marker& m : find_markers(s)) {
      // Bullets 5..9 only confuse the parser at the tail of the last slot.
      if (m.label <= static_cast<int>(kSlotCount) || i + 1 == kSlotCount) {
        out.push_back(name + " contains a bare marker '" + std::string(s.substr(m.pos, m.len)) + "'");
        break;
      }
    }
  }
  return out;
}

// --- Permutation4 -----------------------------------------------------------

Permutation4::Permutation4(std::array<int, kSlotCount> mapping) : mapping_(mapping) {
  if (!is_bijection(mapping)) throw DomainError("permutation must be a bijection on {1,2,3,4}");
}

bool Permutation4::is_bijection(const std::array<int, kSlotCount>& mapping) noexcept {
  std::array<bool, kSlotCount> seen{};
  for (int v : mapping) {
    if (v < 1 || v > static_cast<int>(kSlotCount) || seen[static_cast<std::size_t>(v - 1)]) return false;
    seen[static_cast<std::size_t>(v - 1)] = true;
  }
  return true;
}

const std::array<Permutation4, 24>& Permutation4::all() {
  static const std::array<Permutation4, 24> table = [] {
    std::array<Permutation4, 24> t;
    std::array<int, kSlotCount> m{1, 2, 3, 4};
    std::size_t i = 0;
    do {
      t[i++] = Permutation4(m);
    } while (std::next_permutation(m.begin(), m.end()));
    return t;
  }();
  return table;
}

Permutation4 Permutation4::from_rank(int rank) {
  if (rank < 0 || rank >= 24) throw DomainError("permutation rank must be in [0, 24)");
  return all()[static_cast<std::size_t>(rank)];
}

int Permutation4::rank() const noexcept {
  // Lehmer code in factorial base.
  static constexpr std::array<int, kSlotCount> kFactorial{6, 2, 1, 1};
  int r = 0;
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    int smaller = 0;
    for (std::size_t j = i + 1; j < kSlotCount; ++j) smaller += mapping_[j] < mapping_[i] ? 1 : 0;
    r += smaller * kFactorial[i];
  }
  return r;
}

Permutation4 Permutation4::inverse() const noexcept {
  Permutation4 inv;
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    inv.mapping_[static_cast<std::size_t>(mapping_[i] - 1)] = static_cast<int>(i + 1);
  }
  return inv;
}

Permutation4 Permutation4::then(const Permutation4& next) const noexcept {
  Permutation4 out;
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    out.mapping_[i] = mapping_[static_cast<std::size_t>(next.mapping_[i] - 1)];
  }
  return out;
}

// --- reports ----------------------------------------------------------------

std::string CaptionIssue::to_string() const {
  auto with_slot = [this](const char* name) { return std::string(name) + "(" + std::to_string(slot) + ")"; };
  switch (kind) {
    case IssueKind::missing_marker: return with_slot("missing_marker");
    case IssueKind::out_of_order: return "out_of_order";
    case IssueKind::duplicate_marker: return with_slot("duplicate_marker");
    case IssueKind::empty_slot: return with_slot("empty_slot");
    case IssueKind::trailing_garbage: return "trailing_garbage";
    case IssueKind::repetition_loop: return "repetition_loop";
    case IssueKind::overlength: return "overlength";
  }
  return "unknown";
}

bool ValidationReport::has(IssueKind kind) const noexcept {
  return std::any_of(issues.begin(), issues.end(), [kind](const CaptionIssue& i) { return i.kind == kind; });
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += ", ";
    out += issue.to_string();
  }
  return out.empty() ? "well-formed" : out;
}

CaptionError::CaptionError(ValidationReport report)
    : DomainError("malformed caption: " + report.to_string()), report_(std::move(report)) {}

// --- parse / render ---------------------------------------------------------

ParseResult parse_caption(std::string_view text) {
  ParseResult result;
  auto& issues = result.report.issues;
  std::vector<Marker> markers = find_markers(text);

  // Bullets 5..9 are content unless they continue the list after marker 4.
  std::size_t last_four = std::string_view::npos;
  for (const Marker& m : markers) {
    if (m.label == static_cast<int>(kSlotCount)) last_four = m.pos;
  }
  bool extra_bullets = false;
  std::erase_if(markers, [&](const Marker& m) {
    if (m.label <= static_cast<int>(kSlotCount)) return false;
    if (last_four != std::string_view::npos && m.pos > last_four) extra_bullets = true;
    return true;
  });

  if (markers.empty()) {
    for (int i = 1; i <= static_cast<int>(kSlotCount); ++i) issues.push_back({IssueKind::missing_marker, i});
    return result;
  }

  const MarkerStyle style = markers.front().style;
  std::array<int, kSlotCount> counts{};
  std::vector<int> first_order;
  bool mixed = false;
  for (const Marker& m : markers) {
    if (counts[static_cast<std::size_t>(m.label - 1)]++ == 0) first_order.push_back(m.label);
    mixed = mixed || m.style != style;
  }
  for (int i = 1; i <= static_cast<int>(kSlotCount); ++i) {
    if (counts[static_cast<std::size_t>(i - 1)] == 0) issues.push_back({IssueKind::missing_marker, i});
  }
  for (int i = 1; i <= static_cast<int>(kSlotCount); ++i) {
    if (counts[static_cast<std::size_t>(i - 1)] > 1) issues.push_back({IssueKind::duplicate_marker, i});
  }
  // A style switch breaks the fixed marker sequence just like a reordering.
  if (mixed || !std::is_sorted(first_order.begin(), first_order.end())) {
    issues.push_back({IssueKind::out_of_order, 0});
  }
  if (!trim(text.substr(0, markers.front().pos)).empty() || extra_bullets) {
    issues.push_back({IssueKind::trailing_garbage, 0});
  }
  if (!issues.empty()) return result;

  StructuredCaption caption;
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    const std::size_t begin = markers[i].pos + markers[i].len;
    const std::size_t end = i + 1 < kSlotCount ? markers[i + 1].pos : text.size();
    caption.slots[i] = normalize_slot(text.substr(begin, end - begin));
    if (caption.slots[i].empty()) issues.push_back({IssueKind::empty_slot, static_cast<int>(i + 1)});
  }
  if (issues.empty()) result.parsed = ParsedCaption{std::move(caption), style};
  return result;
}

std::string render(const StructuredCaption& caption, MarkerStyle style) {
  if (auto v = caption_violations(caption); !v.empty()) throw DomainError("cannot render caption: " + v.front());
  std::string out;
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    if (i > 0) out.push_back(' ');
    out += marker_text(style, static_cast<int>(i + 1));
    out.push_back(' ');
    out += caption.slots[i];
  }
  return out;
}

StructuredCaption permute_slots(const StructuredCaption& caption, const Permutation4& g) {
  StructuredCaption out;
  for (std::size_t i = 0; i < kSlotCount; ++i) out.slots[i] = caption.slots[static_cast<std::size_t>(g[i] - 1)];
  return out;
}

ShuffledCaption shuffle(const StructuredCaption& caption, const Permutation4& g, MarkerStyle style) {
  return {render(permute_slots(caption, g), style), g};
}

StructuredCaption canonicalize(std::string_view shuffled_text, const Permutation4& g) {
  ParseResult parsed = parse_caption(shuffled_text);
  if (!parsed) throw CaptionError(std::move(parsed.report));
  return permute_slots(parsed.parsed->caption, g.inverse());
}

namespace {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Permutation4 random_permutation(std::uint64_t seed, std::string_view record_id) {
  const std::uint64_t h = splitmix64(fnv1a64(record_id) ^ splitmix64(seed));
  return Permutation4::from_rank(static_cast<int>(h % 24));
}

std::string rewrite_markers(std::string_view text) {
  ParseResult parsed = parse_caption(text);
  if (!parsed) throw CaptionError(std::move(parsed.report));
  return render(parsed.parsed->caption, MarkerStyle::tilde);
}

// --- defects ----------------------------------------------------------------

std::vector<std::string> DefectThresholds::violations() const {
  std::vector<std::string> out;
  if (!(repeat_ratio > 0.0 && repeat_ratio <= 1.0)) out.push_back("defects.repeat_ratio must be in (0, 1]");
  if (sentence_repeats < 2) out.push_back("defects.sentence_repeats must be >= 2");
  if (max_chars == 0) out.push_back("defects.max_chars must be > 0");
  return out;
}

double repeated_ngram_ratio(std::string_view text, std::size_t n) {
  if (n == 0) throw DomainError("n-gram length must be positive");
  const std::vector<std::string> words = lower_words(text);
  if (words.size() < n) return 0.0;
  const std::size_t total = words.size() - n + 1;
  std::unordered_set<std::string> seen;
  std::size_t repeats = 0;
  for (std::size_t i = 0; i < total; ++i) {
    std::string key;
    for (std::size_t j = 0; j < n; ++j) {
      key += words[i + j];
      key.push_back('\x1f');
    }
    if (!seen.insert(std::move(key)).second) ++repeats;
  }
  return static_cast<double>(repeats) / static_cast<double>(total);
}

int max_sentence_repeats(std::string_view text) {
  std::unordered_map<std::string, int> counts;
  int best = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i < text.size() && text[i] != '.' && text[i] != '!' && text[i] != '?' && !is_line_break(text[i])) continue;
    const std::vector<std::string> words = lower_words(text.substr(start, i - start));
    start = i + 1;
    // Marker fragments and stray numerals are not sentences.
    if (words.size() < 3) continue;
    std::string key;
    for (const auto& w : words) key += w + " ";
    best = std::max(best, ++counts[key]);
  }
  return best;
}

ValidationReport detect_defect(std::string_view text, const DefectThresholds& thresholds) {
  ValidationReport report = parse_caption(text).report;
  if (repeated_ngram_ratio(text, 4) > thresholds.repeat_ratio ||
      max_sentence_repeats(text) >= thresholds.sentence_repeats) {
    report.issues.push_back({IssueKind::repetition_loop, 0});
  }
  if (text.size() > thresholds.max_chars) report.issues.push_back({IssueKind::overlength, 0});
  return report;
}

}  // namespace curate
